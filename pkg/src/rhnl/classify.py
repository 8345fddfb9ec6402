"""Classifiers over ChaosFEX features.

* cosine similarity against per-class mean representation vectors (ChaosNet rule)
* k-nearest neighbours with Euclidean distance
* Gaussian naive Bayes

Every argmax resolves ties to the lowest class index.  Scores closer than a
tiny relative tolerance count as tied, which keeps decisions stable under
rounding (e.g. when a cosine query is rescaled).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import DimensionError, ParameterError, TrainingError

GNB_VAR_FLOOR = 1e-9
TIE_RTOL = 1e-12


def argmax_lowest(scores: np.ndarray, rtol: float = TIE_RTOL) -> np.ndarray:
    """Row-wise argmax where near-ties go to the lowest column index."""
    scores = np.atleast_2d(scores)
    best = scores.max(axis=1, keepdims=True)
    tol = rtol * np.maximum(1.0, np.abs(best))
    return np.argmax(scores >= best - tol, axis=1)


def _check_labels(labels, n_rows: int, num_classes: int | None = None) -> tuple[np.ndarray, int]:
    y = np.asarray(labels)
    if y.ndim != 1 or y.shape[0] != n_rows:
        raise DimensionError(f"expected {n_rows} labels, got shape {y.shape}")
    if n_rows == 0:
        raise TrainingError("cannot fit on an empty training set")
    if not np.issubdtype(y.dtype, np.integer):
        raise TrainingError("labels must be integers")
    if y.min() < 0:
        raise TrainingError("labels must be 0-based")
    k = int(y.max()) + 1 if num_classes is None else int(num_classes)
    counts = np.bincount(y, minlength=k)
    if counts.size > k:
        raise TrainingError(f"label {int(y.max())} outside 0..{k - 1}")
    empty = np.flatnonzero(counts == 0)
    if empty.size:
        raise TrainingError(f"classes without training samples: {empty.tolist()}")
    return y.astype(np.int64), k


def _as_matrix(features) -> np.ndarray:
    F = np.asarray(features, dtype=np.float64)
    if F.ndim != 2:
        raise DimensionError(f"features must be a 2-D matrix, got shape {F.shape}")
    return F


# --------------------------------------------------------------------------
# Cosine similarity / mean representation vectors


@dataclass(frozen=True, eq=False)
class ClassModel:
    class_labels: tuple[int, ...]
    mean_vectors: np.ndarray

    @property
    def dim(self) -> int:
        return self.mean_vectors.shape[1]

    def to_dict(self) -> dict:
        return {"labels": list(self.class_labels), "mean_vectors": self.mean_vectors.tolist()}

    @classmethod
    def from_dict(cls, data: dict) -> "ClassModel":
        return cls(tuple(int(c) for c in data["labels"]), np.asarray(data["mean_vectors"], dtype=np.float64))


def fit_cosine(features, labels, num_classes: int | None = None) -> ClassModel:
    """Per-class arithmetic mean of the training rows."""
    F = _as_matrix(features)
    y, k = _check_labels(labels, F.shape[0], num_classes)
    means = np.stack([F[y == c].mean(axis=0) for c in range(k)])
    return ClassModel(tuple(range(k)), means)


def cosine_similarities(model: ClassModel, features) -> np.ndarray:
    """``(rows, classes)`` cosine similarities; zero vectors score 0 against everything."""
    F = np.atleast_2d(np.asarray(features, dtype=np.float64))
    if F.shape[1] != model.dim:
        raise DimensionError(f"query length {F.shape[1]} does not match model dimension {model.dim}")
    q_norm = np.linalg.norm(F, axis=1)
    m_norm = np.linalg.norm(model.mean_vectors, axis=1)
    dots = F @ model.mean_vectors.T
    denom = np.outer(q_norm, m_norm)
    with np.errstate(divide="ignore", invalid="ignore"):
        sims = np.where(denom > 0, dots / np.where(denom > 0, denom, 1.0), 0.0)
    return sims


def predict_cosine(model: ClassModel, features) -> np.ndarray | int:
    """Class with the highest cosine similarity.

    A single vector returns an ``int``; a matrix returns one label per row.
    """
    arr = np.asarray(features, dtype=np.float64)
    idx = argmax_lowest(cosine_similarities(model, arr))
    labels = np.asarray(model.class_labels, dtype=np.int64)[idx]
    return int(labels[0]) if arr.ndim == 1 else labels


# --------------------------------------------------------------------------
# k-nearest neighbours


@dataclass(frozen=True, eq=False)
class KnnModel:
    rows: np.ndarray
    labels: np.ndarray
    k: int
    num_classes: int


def fit_knn(train, labels, k: int, num_classes: int | None = None) -> KnnModel:
    F = _as_matrix(train)
    y, nc = _check_labels(labels, F.shape[0], num_classes)
    if not isinstance(k, (int, np.integer)) or k < 1 or k > F.shape[0]:
        raise ParameterError(f"k must be an integer in [1, {F.shape[0]}], got {k}")
    return KnnModel(F, y, int(k), nc)


def predict_knn(model: KnnModel, test, chunk: int = 512) -> np.ndarray:
    """Majority vote among the k nearest rows.

    Equal distances prefer the lower training-row index; equal votes the lower label.
    """
    T = _as_matrix(test)
    if T.shape[1] != model.rows.shape[1]:
        raise DimensionError("test and training features differ in width")
    out = np.empty(T.shape[0], dtype=np.int64)
    for start in range(0, T.shape[0], chunk):
        block = T[start : start + chunk]
        diff = block[:, None, :] - model.rows[None, :, :]
        d2 = np.einsum("ijk,ijk->ij", diff, diff)
        nearest = np.argsort(d2, axis=1, kind="stable")[:, : model.k]
        votes = model.labels[nearest]
        for i, v in enumerate(votes):
            out[start + i] = int(np.argmax(np.bincount(v, minlength=model.num_classes)))
    return out


def fit_predict_knn(train, labels, test, k: int, num_classes: int | None = None) -> np.ndarray:
    return predict_knn(fit_knn(train, labels, k, num_classes), test)


# --------------------------------------------------------------------------
# Gaussian naive Bayes


@dataclass(frozen=True, eq=False)
class GnbModel:
    priors: np.ndarray
    means: np.ndarray
    variances: np.ndarray


def fit_gnb(train, labels, num_classes: int | None = None, var_floor: float = GNB_VAR_FLOOR) -> GnbModel:
    """Class priors plus per-class, per-feature mean and (population) variance."""
    F = _as_matrix(train)
    y, k = _check_labels(labels, F.shape[0], num_classes)
    counts = np.bincount(y, minlength=k).astype(np.float64)
    means = np.stack([F[y == c].mean(axis=0) for c in range(k)])
    var = np.stack([F[y == c].var(axis=0) for c in range(k)])
    return GnbModel(counts / counts.sum(), means, np.maximum(var, var_floor))


def gnb_log_joint(model: GnbModel, test) -> np.ndarray:
    """``log prior_c + sum_j log N(x_j; mean_cj, var_cj)`` for every row and class."""
    T = _as_matrix(test)
    if T.shape[1] != model.means.shape[1]:
        raise DimensionError("test and training features differ in width")
    log_norm = -0.5 * np.sum(np.log(2.0 * np.pi * model.variances), axis=1)
    diff = T[:, None, :] - model.means[None, :, :]
    quad = -0.5 * np.sum(diff * diff / model.variances[None, :, :], axis=2)
    return np.log(model.priors)[None, :] + log_norm[None, :] + quad


def predict_gnb(model: GnbModel, test) -> np.ndarray:
    return argmax_lowest(gnb_log_joint(model, test)).astype(np.int64)


def fit_predict_gnb(train, labels, test, num_classes: int | None = None) -> np.ndarray:
    return predict_gnb(fit_gnb(train, labels, num_classes), test)
