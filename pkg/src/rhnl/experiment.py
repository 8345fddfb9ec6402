"""End-to-end pipelines shared by the command-line harness.

Each function takes already-loaded data plus plain parameters and returns
JSON-ready dictionaries, so the CLI only deals with configuration and files.
"""

from __future__ import annotations

import statistics
from dataclasses import dataclass

import numpy as np

from .chaos import DEFAULT_CAP, ChaoticMap, Hyperparams, lyapunov
from .chaosfex import TransformStats, transform
from .classify import fit_cosine, fit_gnb, fit_knn, predict_cosine, predict_gnb, predict_knn
from .dataio import Dataset, RawTable, holdout_split, lowsample_splits, normalize, split, split_record
from .exceptions import ParameterError, SplitError
from .layer import NeuronLayout, Scheme, build_layout, canonical_name
from .metrics import macro_f1, metrics_report
from .seeding import derive_rng

CLASSIFIERS = ("cosine", "knn", "gnb")


@dataclass(frozen=True)
class SplitSpec:
    """How to cut a dataset into train and test rows.

    ``mode="counts"`` draws ``train_counts[c]`` rows of class ``c`` with the
    seed's split stream; ``mode="holdout"`` uses the fixed permutation split
    (independent of the experiment seed).
    """

    mode: str = "holdout"
    train_counts: tuple[int, ...] | None = None
    test_fraction: float = 0.2
    random_state: int = 42

    def __post_init__(self):
        if self.mode not in ("holdout", "counts"):
            raise ParameterError(f"unknown split mode {self.mode!r}")
        if self.mode == "counts" and not self.train_counts:
            raise ParameterError("split mode 'counts' needs train_counts")

    def apply(self, dataset: Dataset, seed: int, normalization: str = "global"):
        if self.mode == "counts":
            return split(dataset, self.train_counts, seed=seed, normalization=normalization)
        return holdout_split(dataset, self.test_fraction, self.random_state, normalization)

    def to_dict(self) -> dict:
        out = {"mode": self.mode}
        if self.mode == "counts":
            out["train_counts"] = list(self.train_counts)
        else:
            out.update(test_fraction=self.test_fraction, random_state=self.random_state)
        return out


@dataclass(frozen=True)
class Architecture:
    scheme: Scheme
    proportion_logistic: float

    @property
    def name(self) -> str:
        return canonical_name(self.scheme, self.proportion_logistic)

    def layout(self, n: int, seed: int) -> NeuronLayout:
        return build_layout(n, self.scheme, self.proportion_logistic, seed)


def fit_predict(classifier: str, F_train, y_train, F_test, num_classes: int, k: int = 1) -> np.ndarray:
    if classifier == "cosine":
        return predict_cosine(fit_cosine(F_train, y_train, num_classes), F_test)
    if classifier == "knn":
        return predict_knn(fit_knn(F_train, y_train, k, num_classes), F_test)
    if classifier == "gnb":
        return predict_gnb(fit_gnb(F_train, y_train, num_classes), F_test)
    raise ParameterError(f"unknown classifier {classifier!r}; choose from {CLASSIFIERS}")


def evaluate_once(
    train: Dataset,
    test: Dataset,
    layout: NeuronLayout,
    hp: Hyperparams,
    classifier: str = "cosine",
    k: int = 1,
    cap: int = DEFAULT_CAP,
    *,
    normalize_features: bool = True,
    n_jobs: int = 1,
) -> dict:
    """Transform both sides, fit on train, score on test."""
    if test.m == 0:
        raise SplitError("test set is empty")
    stats = TransformStats()
    F_train = transform(train.X, layout, hp, cap, normalize=normalize_features, n_jobs=n_jobs, stats=stats)
    F_test = transform(test.X, layout, hp, cap, normalize=normalize_features, n_jobs=n_jobs, stats=stats)
    pred = fit_predict(classifier, F_train, train.y, F_test, train.num_classes, k)
    report = metrics_report(test.y, pred, train.num_classes, train.class_names)
    report["undetected_traces"] = stats.undetected
    return report


def summarize(values) -> dict:
    vals = [float(v) for v in values]
    return {
        "median": float(statistics.median(vals)),
        "mean": float(np.mean(vals)),
        "std": float(np.std(vals)),
        "per_seed": vals,
    }


def run_eval(
    dataset: Dataset,
    split_spec: SplitSpec,
    arch: Architecture,
    hp: Hyperparams,
    classifier: str = "cosine",
    k: int = 1,
    seeds=(0,),
    cap: int = DEFAULT_CAP,
    *,
    normalization: str = "global",
    normalize_features: bool = True,
    self_test: bool = False,
    n_jobs: int = 1,
) -> dict:
    """Evaluate one configuration under several seeds.

    A seed fixes the neuron layout and, for count splits, the row assignment.
    ``self_test`` scores the training rows themselves.
    """
    runs = []
    for seed in seeds:
        train, test = split_spec.apply(dataset, seed, normalization)
        if self_test:
            test = train
        layout = arch.layout(dataset.n, seed)
        report = evaluate_once(train, test, layout, hp, classifier, k, cap,
                               normalize_features=normalize_features, n_jobs=n_jobs)
        runs.append({"seed": int(seed), "layout": layout.to_dict(), "split": split_record(train, test),
                     "metrics": report})
    return {"runs": runs, "macro_f1": summarize(r["metrics"]["macro_f1"] for r in runs)}


def run_sweep(
    dataset: Dataset,
    split_spec: SplitSpec,
    archs,
    classifiers,
    hp_for,
    k_for,
    seeds=(0,),
    cap: int = DEFAULT_CAP,
    *,
    normalization: str = "global",
    normalize_features: bool = True,
    n_jobs: int = 1,
) -> list[dict]:
    """One row per (architecture, classifier) cell.

    ``hp_for(arch)`` and ``k_for(arch)`` supply the per-architecture
    hyperparameters and kNN neighbour count.
    """
    if not archs:
        raise ParameterError("architecture list is empty")
    if not classifiers:
        raise ParameterError("classifier list is empty")
    rows = []
    for arch in archs:
        hp = hp_for(arch)
        for clf in classifiers:
            res = run_eval(dataset, split_spec, arch, hp, clf, k_for(arch), seeds, cap,
                           normalization=normalization, normalize_features=normalize_features, n_jobs=n_jobs)
            s = res["macro_f1"]
            rows.append({
                "architecture": arch.name,
                "scheme": arch.scheme.value,
                "proportion_logistic": arch.proportion_logistic,
                "classifier": clf,
                "q": hp.q,
                "b": hp.b,
                "epsilon": hp.epsilon,
                "seeds": len(s["per_seed"]),
                "median_macro_f1": s["median"],
                "mean_macro_f1": s["mean"],
                "per_seed": s["per_seed"],
            })
    return rows


def run_lowsample(
    dataset: Dataset,
    arch: Architecture,
    hp: Hyperparams,
    sizes=range(1, 16),
    trials: int = 10,
    seed: int = 0,
    classifier: str = "cosine",
    k: int = 1,
    cap: int = DEFAULT_CAP,
    *,
    normalization: str = "global",
    normalize_features: bool = True,
) -> list[dict]:
    """Mean and spread of test macro F1 for each training size per class."""
    layout = arch.layout(dataset.n, seed)
    rows = []
    for size in sizes:
        scores = []
        for train, test in lowsample_splits(dataset, int(size), trials, seed, normalization):
            F_train = transform(train.X, layout, hp, cap, normalize=normalize_features)
            F_test = transform(test.X, layout, hp, cap, normalize=normalize_features)
            kk = min(k, train.m)
            pred = fit_predict(classifier, F_train, train.y, F_test, dataset.num_classes, kk)
            scores.append(macro_f1(test.y, pred, dataset.num_classes))
        rows.append({"per_class": int(size), "mean_f1": float(np.mean(scores)), "std": float(np.std(scores))})
    return rows


def run_lyapunov(kind: str, values, x0: float = 0.01, iterations: int = 100_000, burn_in: int = 0,
                 r: float = 4.0) -> list[dict]:
    """Exponent for each parameter value: ``r`` for the logistic map, ``b`` for the skew tent."""
    rows = []
    for v in values:
        cmap = ChaoticMap.logistic(float(v)) if kind == "logistic" else ChaoticMap.skew_tent(float(v))
        rows.append({"parameter": float(v), "lyapunov": lyapunov(cmap, x0, iterations, burn_in)})
    return rows


def synthetic_gaussian(per_class: int = 100, n_features: int = 4, separation: float = 1.0, seed: int = 0) -> Dataset:
    """Two isotropic unit-variance Gaussian classes whose means differ by
    ``separation`` along every feature, min-max normalized to [0, 1]."""
    if per_class < 2 or n_features < 1:
        raise ParameterError("need per_class >= 2 and n_features >= 1")
    rng = derive_rng(seed, "synthetic")
    a = rng.normal(0.0, 1.0, size=(per_class, n_features))
    b = rng.normal(separation, 1.0, size=(per_class, n_features))
    raw = RawTable(
        features=np.vstack([a, b]),
        labels=("0",) * per_class + ("1",) * per_class,
        feature_names=tuple(f"x{j}" for j in range(n_features)),
    )
    return normalize(raw, name="synthetic")
