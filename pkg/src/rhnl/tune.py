"""Grid search over (q, b, epsilon) with stratified k-fold cross-validation."""

from __future__ import annotations

import csv
import itertools
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .chaos import DEFAULT_CAP, Hyperparams
from .chaosfex import transform
from .classify import fit_cosine, fit_knn, predict_cosine, predict_knn
from .exceptions import ParameterError, StratificationError
from .layer import NeuronLayout
from .metrics import macro_f1
from .seeding import derive_rng


def _axis(values) -> tuple[float, ...]:
    return tuple(sorted({round(float(v), 6) for v in values}))


@dataclass(frozen=True)
class Grid:
    q_values: tuple[float, ...]
    b_values: tuple[float, ...]
    epsilon_values: tuple[float, ...]

    def __post_init__(self):
        for name in ("q_values", "b_values", "epsilon_values"):
            vals = tuple(float(v) for v in getattr(self, name))
            if not vals:
                raise ParameterError(f"{name} must not be empty")
            if any(not 0.0 < v < 1.0 for v in vals):
                raise ParameterError(f"{name} must lie strictly inside (0, 1)")
            if any(a >= b for a, b in zip(vals, vals[1:])):
                raise ParameterError(f"{name} must be strictly ascending")
            object.__setattr__(self, name, vals)

    @classmethod
    def from_values(cls, q_values, b_values, epsilon_values) -> "Grid":
        """Build a grid from unsorted values; duplicates are dropped."""
        return cls(_axis(q_values), _axis(b_values), _axis(epsilon_values))

    @classmethod
    def single(cls, hp: Hyperparams) -> "Grid":
        return cls((hp.q,), (hp.b,), (hp.epsilon,))

    def __len__(self):
        return len(self.q_values) * len(self.b_values) * len(self.epsilon_values)

    def points(self):
        """Grid points in table order: q outermost, epsilon innermost."""
        for q, b, eps in itertools.product(self.q_values, self.b_values, self.epsilon_values):
            yield Hyperparams(q, b, eps)

    def contains(self, hp: Hyperparams, tol: float = 1e-9) -> bool:
        return all(
            any(abs(v - x) <= tol for v in axis)
            for x, axis in ((hp.q, self.q_values), (hp.b, self.b_values), (hp.epsilon, self.epsilon_values))
        )

    def to_dict(self) -> dict:
        return {"q_values": list(self.q_values), "b_values": list(self.b_values),
                "epsilon_values": list(self.epsilon_values)}


# Off-lattice optima from the published RH25L75G / RH50L50G / RH75L25G tuning
# tables, merged into the default axes so every reported triple is reachable.
_PUBLISHED_Q = (0.062, 0.069, 0.099)
_PUBLISHED_B = (0.139, 0.169, 0.185, 0.189, 0.219, 0.259, 0.269, 0.289, 0.299,
                0.359, 0.409, 0.419, 0.469, 0.479, 0.489)
_PUBLISHED_EPS = (0.030, 0.050, 0.298, 0.809)


def default_grid() -> Grid:
    """q in 0.01..0.50, b in 0.01..0.49 (step 0.01), epsilon in 0.001..0.301 (step 0.01),
    each extended with the published off-lattice optima."""
    q = [i / 100 for i in range(1, 51)] + list(_PUBLISHED_Q)
    b = [i / 100 for i in range(1, 50)] + list(_PUBLISHED_B)
    eps = [0.001 + i / 100 for i in range(31)] + list(_PUBLISHED_EPS)
    return Grid.from_values(q, b, eps)


def coarse_grid() -> Grid:
    """A 10 x 10 x 8 grid for quick exploratory runs."""
    return Grid.from_values(
        [0.05 * i for i in range(1, 11) if 0.05 * i < 1],
        [0.049 + 0.05 * i for i in range(10)],
        [0.011, 0.031, 0.051, 0.081, 0.121, 0.161, 0.221, 0.301],
    )


def stratified_folds(labels, k: int = 5, seed: int = 0) -> list[np.ndarray]:
    """Partition sample indices into ``k`` folds with per-class counts differing by at most one.

    Each class is shuffled with the seed's fold stream and dealt round-robin;
    the dealing position carries over between classes so fold sizes stay balanced.
    """
    y = np.asarray(labels)
    if k < 2:
        raise ParameterError(f"need at least 2 folds, got {k}")
    classes, counts = np.unique(y, return_counts=True)
    small = classes[counts < k]
    if small.size:
        raise StratificationError(f"classes {small.tolist()} have fewer than {k} samples")
    rng = derive_rng(seed, "folds")
    folds = [[] for _ in range(k)]
    offset = 0
    for c in classes:
        idx = np.flatnonzero(y == c)
        rng.shuffle(idx)
        for i, sample in enumerate(idx):
            folds[(offset + i) % k].append(sample)
        offset = (offset + idx.size) % k
    return [np.sort(np.array(f, dtype=np.int64)) for f in folds]


def _fold_pairs(folds):
    for i, val in enumerate(folds):
        train = np.sort(np.concatenate([f for j, f in enumerate(folds) if j != i]))
        yield train, val


def cv_scores(features: np.ndarray, labels, folds, num_classes: int, classifier: str = "cosine", k: int = 1):
    """Macro F1 of each held-out fold for the given classifier."""
    y = np.asarray(labels)
    scores = []
    for train, val in _fold_pairs(folds):
        if classifier == "cosine":
            model = fit_cosine(features[train], y[train], num_classes)
            pred = predict_cosine(model, features[val])
        elif classifier == "knn":
            pred = predict_knn(fit_knn(features[train], y[train], min(k, train.size), num_classes), features[val])
        else:
            raise ParameterError(f"unsupported classifier for CV: {classifier}")
        scores.append(macro_f1(y[val], pred, num_classes))
    return scores


@dataclass(frozen=True)
class GridRow:
    hyperparams: Hyperparams
    mean_macro_f1: float
    fold_scores: tuple[float, ...]


@dataclass
class TuneResult:
    best: Hyperparams
    best_cv_macro_f1: float
    table: list[GridRow] = field(default_factory=list)

    def to_json(self) -> str:
        return json.dumps(
            {"best": self.best.as_dict(), "best_cv_macro_f1": self.best_cv_macro_f1, "grid_points": len(self.table)},
            indent=2,
            sort_keys=True,
        )

    def write_csv(self, path) -> None:
        k = max((len(r.fold_scores) for r in self.table), default=0)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["q", "b", "epsilon", "mean_macro_f1"] + [f"fold{i}" for i in range(k)])
            for r in self.table:
                hp = r.hyperparams
                w.writerow([repr(hp.q), repr(hp.b), repr(hp.epsilon), repr(r.mean_macro_f1)]
                           + [repr(s) for s in r.fold_scores])


def select_best(table: list[GridRow]) -> GridRow:
    """Highest mean macro F1; ties go to smaller epsilon, then smaller q, then smaller b."""
    return min(table, key=lambda r: (-r.mean_macro_f1, r.hyperparams.epsilon, r.hyperparams.q, r.hyperparams.b))


def grid_search(
    X_train,
    y_train,
    layout: NeuronLayout,
    grid: Grid,
    k: int = 5,
    cap: int = DEFAULT_CAP,
    seed: int = 0,
    *,
    num_classes: int | None = None,
    normalize: bool = True,
    n_jobs: int = 1,
    progress=None,
) -> TuneResult:
    """Score every grid point by mean k-fold macro F1 of the cosine classifier.

    Features are per-sample, so each grid point transforms the training matrix
    once and the folds slice it.  The table follows grid order regardless of
    ``n_jobs``.
    """
    y = np.asarray(y_train, dtype=np.int64)
    nc = int(y.max()) + 1 if num_classes is None else num_classes
    folds = stratified_folds(y, k, seed)
    points = list(grid.points())

    def evaluate(hp: Hyperparams) -> GridRow:
        F = transform(X_train, layout, hp, cap, normalize=normalize)
        scores = cv_scores(F, y, folds, nc)
        return GridRow(hp, float(np.mean(scores)), tuple(scores))

    if n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            table = list(pool.map(evaluate, points))
    else:
        table = []
        for i, hp in enumerate(points):
            table.append(evaluate(hp))
            if progress is not None:
                progress(i + 1, len(points))
    best = select_best(table)
    return TuneResult(best.hyperparams, best.mean_macro_f1, table)


def tune_knn_k(features, labels, ks=(1, 3, 5), folds_k: int = 5, seed: int = 0, num_classes: int | None = None):
    """Pick k for kNN on fixed ChaosFEX features by mean CV macro F1 (ties: smaller k)."""
    y = np.asarray(labels, dtype=np.int64)
    nc = int(y.max()) + 1 if num_classes is None else num_classes
    folds = stratified_folds(y, folds_k, seed)
    results = {kk: float(np.mean(cv_scores(features, y, folds, nc, "knn", kk))) for kk in ks}
    best_k = min(results, key=lambda kk: (-results[kk], kk))
    return best_k, results
