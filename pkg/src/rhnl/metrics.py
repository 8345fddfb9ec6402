"""Confusion counts, accuracy, per-class precision/recall/F1, and macro F1.

Any 0/0 ratio (a class never predicted or never present) is taken as 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import DimensionError


def _pair(truth, predicted):
    t = np.asarray(truth, dtype=np.int64)
    p = np.asarray(predicted, dtype=np.int64)
    if t.shape != p.shape or t.ndim != 1:
        raise DimensionError(f"truth and predicted differ in shape: {t.shape} vs {p.shape}")
    return t, p


def confusion_matrix(truth, predicted, num_classes: int) -> np.ndarray:
    """``C[i, j]`` counts samples of true class ``i`` predicted as ``j``."""
    t, p = _pair(truth, predicted)
    if t.size and (min(t.min(), p.min()) < 0 or max(t.max(), p.max()) >= num_classes):
        raise DimensionError(f"labels must lie in [0, {num_classes})")
    cm = np.zeros((num_classes, num_classes), dtype=np.int64)
    np.add.at(cm, (t, p), 1)
    return cm


@dataclass(frozen=True)
class ConfusionCounts:
    """One-vs-rest TP/FP/FN/TN arrays indexed by class."""

    tp: np.ndarray
    fp: np.ndarray
    fn: np.ndarray
    tn: np.ndarray

    @classmethod
    def from_matrix(cls, cm: np.ndarray) -> "ConfusionCounts":
        tp = np.diag(cm).copy()
        fp = cm.sum(axis=0) - tp
        fn = cm.sum(axis=1) - tp
        tn = cm.sum() - tp - fp - fn
        return cls(tp, fp, fn, tn)


def _ratio(num, den):
    num = np.asarray(num, dtype=np.float64)
    den = np.asarray(den, dtype=np.float64)
    return np.divide(num, den, out=np.zeros_like(num), where=den > 0)


def per_class_scores(truth, predicted, num_classes: int):
    """Return ``(precision, recall, f1)`` arrays of length ``num_classes``."""
    c = ConfusionCounts.from_matrix(confusion_matrix(truth, predicted, num_classes))
    precision = _ratio(c.tp, c.tp + c.fp)
    recall = _ratio(c.tp, c.tp + c.fn)
    f1 = _ratio(2.0 * precision * recall, precision + recall)
    return precision, recall, f1


def macro_f1(truth, predicted, num_classes: int) -> float:
    return float(np.mean(per_class_scores(truth, predicted, num_classes)[2]))


def accuracy(truth, predicted) -> float:
    t, p = _pair(truth, predicted)
    if t.size == 0:
        raise DimensionError("accuracy of an empty prediction set is undefined")
    return float(np.count_nonzero(t == p)) / t.size


def metrics_report(truth, predicted, num_classes: int, class_names=None) -> dict:
    """JSON-ready report with accuracy, per-class scores, macro F1 and the confusion matrix."""
    precision, recall, f1 = per_class_scores(truth, predicted, num_classes)
    names = [str(c) for c in (class_names if class_names is not None else range(num_classes))]
    return {
        "accuracy": accuracy(truth, predicted),
        "per_class": {
            names[c]: {"precision": float(precision[c]), "recall": float(recall[c]), "f1": float(f1[c])}
            for c in range(num_classes)
        },
        "macro_f1": float(np.mean(f1)),
        "confusion_matrix": confusion_matrix(truth, predicted, num_classes).tolist(),
    }
