"""CSV ingestion, min-max normalization, label encoding and seeded splits."""

from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .exceptions import ParseError, SplitError
from .seeding import derive_rng

MISSING_TOKENS = frozenset({"", "?", "na", "nan", "null", "none"})


@dataclass(frozen=True, eq=False)
class RawTable:
    """Parsed CSV: numeric feature matrix plus string labels."""

    features: np.ndarray
    labels: tuple[str, ...]
    feature_names: tuple[str, ...]
    label_name: str = "label"

    @property
    def m(self) -> int:
        return self.features.shape[0]


def load_csv(path, label_column: str | int = "last", has_header: bool = True) -> RawTable:
    """Read a CSV of numeric features and one label column.

    ``label_column`` is ``"last"``, ``"first"``, a header name, or a 0-based index.
    Missing cells and non-numeric features raise :class:`ParseError` naming the
    1-based line number.
    """
    path = Path(path)
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh)]
    rows = [r for r in rows if any(cell.strip() for cell in r)]
    if not rows:
        raise ParseError(f"{path}: file is empty")

    if has_header:
        header = [h.strip() for h in rows[0]]
        body = rows[1:]
        line0 = 2
    else:
        header = [f"x{j}" for j in range(len(rows[0]) - 1)] + ["label"]
        body = rows
        line0 = 1
    width = len(header)
    if width < 2:
        raise ParseError(f"{path}: need at least one feature column and a label column")

    if label_column == "last":
        li = width - 1
    elif label_column == "first":
        li = 0
    elif isinstance(label_column, int):
        li = label_column if label_column >= 0 else width + label_column
    elif label_column in header:
        li = header.index(label_column)
    else:
        raise ParseError(f"{path}: no label column named {label_column!r}")
    if not 0 <= li < width:
        raise ParseError(f"{path}: label column index {label_column} out of range")

    feat_idx = [j for j in range(width) if j != li]
    X = np.empty((len(body), len(feat_idx)), dtype=np.float64)
    labels = []
    for i, row in enumerate(body):
        line = line0 + i
        if len(row) != width:
            raise ParseError(f"{path}: line {line} has {len(row)} fields, expected {width}")
        label = row[li].strip()
        if label.lower() in MISSING_TOKENS:
            raise ParseError(f"{path}: line {line} has a missing label")
        labels.append(label)
        for out_j, j in enumerate(feat_idx):
            cell = row[j].strip()
            if cell.lower() in MISSING_TOKENS:
                raise ParseError(f"{path}: line {line}, column {header[j]!r} is missing")
            try:
                X[i, out_j] = float(cell)
            except ValueError:
                raise ParseError(f"{path}: line {line}, column {header[j]!r}: non-numeric value {cell!r}") from None
            if not np.isfinite(X[i, out_j]):
                raise ParseError(f"{path}: line {line}, column {header[j]!r}: non-finite value {cell!r}")
    return RawTable(X, tuple(labels), tuple(header[j] for j in feat_idx), header[li])


def _label_sort_key(label: str):
    try:
        return (0, float(label), label)
    except ValueError:
        return (1, 0.0, label)


@dataclass(frozen=True, eq=False)
class Dataset:
    """Normalized dataset.

    ``raw`` keeps the unscaled features so splits can renormalize on training
    rows only; ``row_ids`` are indices into the originally loaded table.
    """

    X: np.ndarray
    y: np.ndarray
    feature_names: tuple[str, ...]
    class_names: tuple[str, ...]
    mins: np.ndarray
    maxs: np.ndarray
    raw: np.ndarray
    row_ids: np.ndarray
    normalization: str = "global"
    name: str = ""
    meta: dict = field(default_factory=dict)

    @property
    def m(self) -> int:
        return self.X.shape[0]

    @property
    def n(self) -> int:
        return self.X.shape[1]

    @property
    def num_classes(self) -> int:
        return len(self.class_names)

    def class_counts(self) -> tuple[int, ...]:
        return tuple(int(c) for c in np.bincount(self.y, minlength=self.num_classes))

    def scale(self, raw_rows, clip: bool = False) -> np.ndarray:
        """Apply this dataset's min-max parameters to new raw rows."""
        return scale(raw_rows, self.mins, self.maxs, clip=clip)

    def subset(self, idx) -> "Dataset":
        idx = np.asarray(idx, dtype=np.int64)
        return replace(self, X=self.X[idx], y=self.y[idx], raw=self.raw[idx], row_ids=self.row_ids[idx])


def scale(raw_rows, mins, maxs, clip: bool = False) -> np.ndarray:
    raw_rows = np.asarray(raw_rows, dtype=np.float64)
    span = maxs - mins
    safe = np.where(span > 0, span, 1.0)
    X = np.where(span > 0, (raw_rows - mins) / safe, 0.0)
    return np.clip(X, 0.0, 1.0) if clip else X


def denormalize(X, mins, maxs) -> np.ndarray:
    """Inverse of :func:`scale` for non-constant columns (constant columns return their value)."""
    X = np.asarray(X, dtype=np.float64)
    return mins + X * (maxs - mins)


def normalize(raw: RawTable, name: str = "") -> Dataset:
    """Min-max scale every column to [0, 1] and encode labels as 0..K-1.

    Constant columns map to 0.  Class names are sorted (numerically when all
    labels are numbers) before numbering, so labels ``1, 2, 3`` become ``0, 1, 2``.
    """
    if raw.m == 0:
        raise ParseError("dataset has no rows")
    mins = raw.features.min(axis=0)
    maxs = raw.features.max(axis=0)
    classes = sorted(set(raw.labels), key=_label_sort_key)
    lookup = {c: i for i, c in enumerate(classes)}
    y = np.array([lookup[l] for l in raw.labels], dtype=np.int64)
    return Dataset(
        X=scale(raw.features, mins, maxs),
        y=y,
        feature_names=raw.feature_names,
        class_names=tuple(classes),
        mins=mins,
        maxs=maxs,
        raw=raw.features,
        row_ids=np.arange(raw.m, dtype=np.int64),
        name=name,
    )


def load_dataset(path, label_column: str | int = "last", has_header: bool = True, name: str = "") -> Dataset:
    return normalize(load_csv(path, label_column, has_header), name=name or Path(path).stem)


def _renormalize(train: Dataset, test: Dataset) -> tuple[Dataset, Dataset]:
    mins = train.raw.min(axis=0) if train.m else train.mins
    maxs = train.raw.max(axis=0) if train.m else train.maxs
    tr = replace(train, X=scale(train.raw, mins, maxs), mins=mins, maxs=maxs, normalization="train")
    te = replace(test, X=scale(test.raw, mins, maxs, clip=True), mins=mins, maxs=maxs, normalization="train")
    return tr, te


def _per_class_partition(y: np.ndarray, counts, rng: np.random.Generator):
    train, test = [], []
    for c, k in enumerate(counts):
        idx = np.flatnonzero(y == c)
        rng.shuffle(idx)
        train.append(idx[:k])
        test.append(idx[k:])
    return np.sort(np.concatenate(train)), np.sort(np.concatenate(test))


def split(
    dataset: Dataset,
    train_counts,
    seed: int = 0,
    normalization: str = "global",
) -> tuple[Dataset, Dataset]:
    """Seeded per-class split with exactly ``train_counts[c]`` training rows of class ``c``.

    ``normalization="global"`` keeps the full-dataset scaling; ``"train"``
    refits min-max on the training rows and clips test rows into [0, 1].
    """
    counts = [int(c) for c in train_counts]
    have = dataset.class_counts()
    if len(counts) != len(have):
        raise SplitError(f"got {len(counts)} train counts for {len(have)} classes")
    for c, (want, avail) in enumerate(zip(counts, have)):
        if want < 0 or want > avail:
            raise SplitError(f"class {c}: cannot take {want} training rows from {avail}")
    if normalization not in ("global", "train"):
        raise SplitError(f"unknown normalization mode {normalization!r}")
    tr_idx, te_idx = _per_class_partition(dataset.y, counts, derive_rng(seed, "split"))
    train, test = dataset.subset(tr_idx), dataset.subset(te_idx)
    if normalization == "train":
        train, test = _renormalize(train, test)
    return train, test


def holdout_split(
    dataset: Dataset,
    test_fraction: float = 0.2,
    random_state: int = 42,
    normalization: str = "global",
) -> tuple[Dataset, Dataset]:
    """Unstratified holdout: the first ``ceil(test_fraction * m)`` rows of a
    ``numpy.random.RandomState(random_state)`` permutation form the test set.

    This is the same permutation scheme as scikit-learn's ``ShuffleSplit``, so
    ``random_state=42`` reproduces the widely used 80/20 benchmark splits.
    """
    if not 0.0 < test_fraction < 1.0:
        raise SplitError(f"test_fraction must lie in (0, 1), got {test_fraction}")
    n_test = int(np.ceil(test_fraction * dataset.m))
    if n_test >= dataset.m:
        raise SplitError("holdout leaves no training rows")
    perm = np.random.RandomState(random_state).permutation(dataset.m)
    train, test = dataset.subset(np.sort(perm[n_test:])), dataset.subset(np.sort(perm[:n_test]))
    if normalization == "train":
        train, test = _renormalize(train, test)
    return train, test


def lowsample_splits(
    dataset: Dataset,
    per_class: int,
    trials: int = 10,
    seed: int = 0,
    normalization: str = "global",
) -> list[tuple[Dataset, Dataset]]:
    """``trials`` independent splits with ``per_class`` training rows per class."""
    smallest = min(dataset.class_counts())
    if per_class < 1 or per_class > smallest - 1:
        raise SplitError(f"per_class must lie in [1, {smallest - 1}], got {per_class}")
    out = []
    for t in range(trials):
        rng = derive_rng(seed, "trials", per_class, t)
        tr_idx, te_idx = _per_class_partition(dataset.y, [per_class] * dataset.num_classes, rng)
        train, test = dataset.subset(tr_idx), dataset.subset(te_idx)
        if normalization == "train":
            train, test = _renormalize(train, test)
        out.append((train, test))
    return out


def split_record(train: Dataset, test: Dataset) -> dict:
    """Row indices of a split plus a digest, for exact reruns."""
    payload = {"train": train.row_ids.tolist(), "test": test.row_ids.tolist()}
    digest = hashlib.sha256(json.dumps(payload, separators=(",", ":")).encode()).hexdigest()
    return {**payload, "sha256": digest, "normalization": train.normalization}
