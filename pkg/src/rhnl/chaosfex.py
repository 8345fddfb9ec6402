"""ChaosFEX feature extraction: firing time, firing rate, energy and entropy per neuron.

For an ``m x n`` input the output is ``m x 4n``; the block for input feature
``j`` occupies columns ``4j .. 4j+3`` in the order
(firing time, firing rate, energy, entropy).

By default firing time is divided by the iteration cap and energy by the
trace length, which keeps all four features inside [0, 1].
"""

from __future__ import annotations

import csv
import math
import threading
from collections import OrderedDict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .chaos import DEFAULT_CAP, ChaoticMap, Hyperparams, NeuralTrace, iterate
from .exceptions import DimensionError, DomainError
from .layer import NeuronKind, NeuronLayout

FEATURE_NAMES = ("time", "rate", "energy", "entropy")

# Trajectories are computed in growing prefixes; most stimuli are found early.
_PREFIX_LENGTHS = (256, 2048)
# Upper bound on elements of one |trajectory - stimulus| comparison block.
_BLOCK_ELEMENTS = 1 << 22


def _values(trace) -> np.ndarray:
    if isinstance(trace, NeuralTrace):
        return trace.values
    return np.asarray(trace, dtype=np.float64)


def firing_rate(trace, b: float) -> float:
    """Fraction of trace values at or above the threshold ``b``."""
    v = _values(trace)
    return int(np.count_nonzero(v >= b)) / len(v)


def energy(trace) -> float:
    """Sum of squared trace values."""
    v = _values(trace)
    return float(np.sum(v * v))


def binary_entropy(p: float) -> float:
    if p <= 0.0 or p >= 1.0:
        return 0.0
    return -(p * math.log2(p) + (1.0 - p) * math.log2(1.0 - p))


def entropy(trace, b: float) -> float:
    """Shannon entropy in bits of the trace binarized at ``b`` (1 where value >= b)."""
    return binary_entropy(firing_rate(trace, b))


def neuron_features(trace: NeuralTrace, b: float, cap: int = DEFAULT_CAP, normalize: bool = True):
    """The four ChaosFEX features of one trace, in column order."""
    m = trace.firing_time
    e = energy(trace)
    rate = firing_rate(trace, b)
    if normalize:
        return (m / cap, rate, e / m, binary_entropy(rate))
    return (float(m), rate, e, binary_entropy(rate))


def neuron_map(kind: NeuronKind, b: float) -> ChaoticMap:
    """The chaotic map behind a neuron; GLS neurons use ``b`` as their branch point."""
    if kind is NeuronKind.GLS:
        return ChaoticMap.skew_tent(b)
    return ChaoticMap.logistic()


class _TrajectoryCache:
    """Thread-safe LRU cache of neuron trajectories keyed by (kind, q, b, length)."""

    def __init__(self, maxsize: int = 64):
        self.maxsize = maxsize
        self._data: OrderedDict = OrderedDict()
        self._lock = threading.Lock()

    def get(self, kind: NeuronKind, q: float, b: float, length: int) -> np.ndarray:
        # Logistic neurons ignore b, so share their entries across thresholds.
        key = (kind, q, b if kind is NeuronKind.GLS else None, length)
        with self._lock:
            hit = self._data.get(key)
            if hit is not None:
                self._data.move_to_end(key)
                return hit
        traj = iterate(neuron_map(kind, b), q, length)
        traj.setflags(write=False)
        with self._lock:
            self._data[key] = traj
            while len(self._data) > self.maxsize:
                self._data.popitem(last=False)
        return traj

    def clear(self):
        with self._lock:
            self._data.clear()


_cache = _TrajectoryCache()


def _first_hits(kind, hp: Hyperparams, stimuli: np.ndarray, cap: int):
    """Index of the first trajectory value within epsilon of each stimulus (-1 if none)."""
    first = np.full(stimuli.shape, -1, dtype=np.int64)
    pending = np.arange(stimuli.size)
    lengths = [L for L in _PREFIX_LENGTHS if L < cap] + [cap]
    start = 0
    traj = None
    for length in lengths:
        traj = _cache.get(kind, hp.q, hp.b, length)
        rows = max(1, _BLOCK_ELEMENTS // max(1, pending.size))
        pos = start
        while pos < length and pending.size:
            seg = traj[pos : min(length, pos + rows)]
            hit = np.abs(seg[:, None] - stimuli[pending][None, :]) < hp.epsilon
            found = hit.any(axis=0)
            if found.any():
                first[pending[found]] = pos + hit.argmax(axis=0)[found]
                pending = pending[~found]
            pos += seg.size
        start = length
        if not pending.size:
            break
    return first, traj


def _kind_features(kind, hp: Hyperparams, stimuli: np.ndarray, cap: int, normalize: bool):
    first, traj = _first_hits(kind, hp, stimuli, cap)
    undetected = first < 0
    lengths = np.where(undetected, cap, first + 1)
    upto = int(lengths.max()) if lengths.size else 1
    head = traj[:upto]
    cum_sq = np.cumsum(head * head)
    cum_hi = np.cumsum(head >= hp.b)
    m = lengths.astype(np.float64)
    rate = cum_hi[lengths - 1] / m
    e = cum_sq[lengths - 1]
    p = np.clip(rate, 0.0, 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        h = -(p * np.log2(p) + (1.0 - p) * np.log2(1.0 - p))
    h = np.where((p <= 0.0) | (p >= 1.0), 0.0, h)
    if normalize:
        feats = (m / cap, rate, e / m, h)
    else:
        feats = (m, rate, e, h)
    return np.stack(feats, axis=-1), int(np.count_nonzero(undetected))


@dataclass
class TransformStats:
    """Per-call bookkeeping: how many (sample, neuron) traces hit the cap undetected."""

    undetected: int = 0
    traces: int = 0


def check_inputs(X, layout: NeuronLayout) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise DimensionError(f"X must be a 2-D matrix, got shape {X.shape}")
    if X.shape[1] != layout.n:
        raise DimensionError(f"X has {X.shape[1]} features but the layout has {layout.n} neurons")
    if X.size and (np.isnan(X).any() or X.min() < 0.0 or X.max() > 1.0):
        raise DomainError("X must be normalized to [0, 1]")
    return X


def transform(
    X,
    layout: NeuronLayout,
    hp: Hyperparams,
    cap: int = DEFAULT_CAP,
    *,
    normalize: bool = True,
    n_jobs: int = 1,
    stats: TransformStats | None = None,
) -> np.ndarray:
    """Map an ``m x n`` matrix in [0, 1] to its ``m x 4n`` ChaosFEX features.

    Neuron ``j`` is a skew-tent map with branch point ``hp.b`` (GLS) or a
    logistic map with r = 4, started at ``hp.q`` and stopped on entering the
    open ``hp.epsilon`` ball around ``X[i, j]``.  With ``normalize=False``
    firing time and energy are returned raw.

    ``n_jobs > 1`` splits the work over threads; the output does not depend on it.
    """
    X = check_inputs(X, layout)
    m, n = X.shape
    out = np.empty((m, 4 * n), dtype=np.float64)
    if m == 0:
        return out

    mask = layout.logistic_mask
    tasks = []
    for kind, cols in ((NeuronKind.GLS, np.flatnonzero(~mask)), (NeuronKind.LOGISTIC, np.flatnonzero(mask))):
        if cols.size == 0:
            continue
        chunks = np.array_split(cols, max(1, min(n_jobs, cols.size)))
        tasks.extend((kind, c) for c in chunks if c.size)

    def run(task):
        kind, cols = task
        feats, missed = _kind_features(kind, hp, X[:, cols].ravel(), cap, normalize)
        return cols, feats.reshape(m, cols.size, 4), missed

    if n_jobs > 1 and len(tasks) > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            results = list(pool.map(run, tasks))
    else:
        results = [run(t) for t in tasks]

    view = out.reshape(m, n, 4)
    missed_total = 0
    for cols, feats, missed in results:
        view[:, cols, :] = feats
        missed_total += missed
    if stats is not None:
        stats.undetected += missed_total
        stats.traces += m * n
    return out


def feature_names(n: int) -> list[str]:
    return [f"f{j}_{name}" for j in range(n) for name in FEATURE_NAMES]


def write_features_csv(path, features: np.ndarray, labels=None) -> None:
    """Write a feature matrix with header ``f<j>_<time|rate|energy|entropy>``.

    ``path`` may also be an open text stream.

    When ``labels`` is given a trailing ``label`` column is added.
    """
    features = np.asarray(features)
    if features.ndim != 2 or features.shape[1] % 4:
        raise DimensionError(f"feature matrix must be m x 4n, got {features.shape}")
    header = feature_names(features.shape[1] // 4)
    if labels is not None:
        labels = np.asarray(labels)
        if labels.shape[0] != features.shape[0]:
            raise DimensionError("labels and features differ in length")
        header.append("label")
    if hasattr(path, "write"):
        _write_rows(path, header, features, labels)
    else:
        with open(path, "w", newline="") as fh:
            _write_rows(fh, header, features, labels)


def _write_rows(fh, header, features, labels) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(header)
    for i, row in enumerate(features):
        cells = [repr(float(v)) for v in row]
        if labels is not None:
            cells.append(str(int(labels[i])))
        writer.writerow(cells)


def read_features_csv(path):
    """Inverse of :func:`write_features_csv`; returns ``(features, labels or None)``."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = list(reader)
    has_label = header and header[-1] == "label"
    width = len(header) - (1 if has_label else 0)
    features = np.array([[float(c) for c in r[:width]] for r in rows], dtype=np.float64).reshape(len(rows), width)
    labels = np.array([int(r[-1]) for r in rows], dtype=np.int64) if has_label else None
    return features, labels
