"""Command-line experiment harness.

Subcommands: ``tune``, ``eval``, ``sweep``, ``lowsample``, ``lyapunov`` and
``export-features``.  Settings come from an optional JSON config file
(``--config``) with command-line flags taking precedence.  Every output embeds
the resolved configuration, contains no timestamps, and is written atomically,
so rerunning the same command reproduces identical bytes.

Exit codes: 0 on success, 1 on runtime failure, 2 on usage or config errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from .chaos import DEFAULT_CAP, Hyperparams
from .chaosfex import TransformStats, transform, write_features_csv
from .dataio import Dataset, load_dataset, split_record
from .exceptions import ParameterError, RHNLError, SplitError
from .experiment import (
    CLASSIFIERS,
    Architecture,
    SplitSpec,
    run_eval,
    run_lowsample,
    run_lyapunov,
    run_sweep,
    synthetic_gaussian,
)
from .fixtures import DATASETS, TUNED_HYPERPARAMS, TUNED_KNN_K, fixture_split, load_fixture
from .layer import parse_architecture
from .tune import Grid, coarse_grid, default_grid, grid_search, tune_knn_k

log = logging.getLogger("rhnl")


class ConfigError(Exception):
    """Bad configuration or usage; maps to exit code 2."""


# --------------------------------------------------------------------------
# Output helpers


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


def _json_text(data) -> str:
    return json.dumps(data, indent=2, sort_keys=True) + "\n"


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def _write_outputs(outputs: dict[Path, str]) -> None:
    # Everything is rendered before the first file lands on disk.
    for path, text in outputs.items():
        _atomic_write(path, text)
        log.info("wrote %s", path)


# --------------------------------------------------------------------------
# Configuration


def _load_config(path) -> dict:
    if path is None:
        return {}
    try:
        with open(path) as fh:
            data = json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError("config file must hold a JSON object")
    return data


def _merge(args: argparse.Namespace) -> dict:
    """Config file values overridden by any flag the user actually passed."""
    cfg = _load_config(args.config)
    for key, value in vars(args).items():
        if key in ("config", "command", "func", "verbose") or value is None:
            continue
        cfg[key] = value
    cfg.setdefault("seed", 0)
    cfg.setdefault("seeds", 1)
    cfg.setdefault("cap", DEFAULT_CAP)
    cfg.setdefault("out", "results")
    cfg.setdefault("normalization", "global")
    cfg.setdefault("normalize_features", True)
    cfg.setdefault("jobs", 1)
    _check_int(cfg, "seed", 0)
    _check_int(cfg, "seeds", 1)
    _check_int(cfg, "cap", 1)
    _check_int(cfg, "jobs", 1)
    if cfg["normalization"] not in ("global", "train"):
        raise ConfigError("normalization must be 'global' or 'train'")
    return cfg


def _check_int(cfg: dict, key: str, low: int) -> None:
    value = cfg[key]
    if isinstance(value, bool) or not isinstance(value, int) or value < low:
        raise ConfigError(f"{key} must be an integer >= {low}, got {value!r}")


def _seed_list(cfg) -> list[int]:
    return list(range(cfg["seed"], cfg["seed"] + cfg["seeds"]))


def _resolve_dataset(cfg) -> tuple[Dataset, str | None]:
    """Load the configured dataset; the second value is the fixture name, if any."""
    name = cfg.get("dataset")
    if not name:
        raise ConfigError("no dataset given (use --dataset or the 'dataset' config key)")
    if name == "synthetic":
        syn = cfg.get("synthetic", {})
        return synthetic_gaussian(
            per_class=int(syn.get("per_class", 200)),
            n_features=int(syn.get("n_features", 8)),
            separation=float(syn.get("separation", 1.0)),
            seed=int(syn.get("seed", cfg["seed"])),
        ), None
    path = Path(name)
    if path.is_file():
        return load_dataset(path, label_column=cfg.get("label_column", "last"),
                            has_header=cfg.get("has_header", True)), None
    if name in DATASETS:
        try:
            return load_fixture(name, cfg.get("data_dir")), name
        except FileNotFoundError as exc:
            raise ConfigError(str(exc)) from None
    raise ConfigError(f"dataset file not found: {name}")


def _resolve_split(cfg, fixture: str | None) -> SplitSpec:
    spec = cfg.get("split")
    if spec is None:
        return fixture_split(fixture) if fixture else SplitSpec("holdout")
    if not isinstance(spec, dict):
        raise ConfigError("'split' must be an object")
    try:
        return SplitSpec(
            mode=spec.get("mode", "holdout"),
            train_counts=tuple(int(c) for c in spec["train_counts"]) if "train_counts" in spec else None,
            test_fraction=float(spec.get("test_fraction", 0.2)),
            random_state=int(spec.get("random_state", 42)),
        )
    except RHNLError as exc:
        raise ConfigError(str(exc)) from None


def _resolve_arch(label: str) -> Architecture:
    try:
        return Architecture(*parse_architecture(label))
    except (RHNLError, ValueError) as exc:
        raise ConfigError(str(exc)) from None


def _resolve_hp(cfg, arch_label: str, fixture: str | None) -> Hyperparams:
    explicit = cfg.get("hyperparams", {})
    if not isinstance(explicit, dict):
        raise ConfigError("'hyperparams' must be an object with q, b, epsilon")
    values = {k: explicit.get(k) for k in ("q", "b", "epsilon")}
    for k in values:
        if cfg.get(k) is not None:
            values[k] = cfg[k]
    if any(v is None for v in values.values()):
        published = TUNED_HYPERPARAMS.get(arch_label.upper(), {}).get(fixture) if fixture else None
        if published is None:
            missing = [k for k, v in values.items() if v is None]
            raise ConfigError(f"hyperparameters {missing} not given and no published values apply")
        values = {k: getattr(published, k) if v is None else v for k, v in values.items()}
    try:
        return Hyperparams(float(values["q"]), float(values["b"]), float(values["epsilon"]))
    except (RHNLError, ValueError) as exc:
        raise ConfigError(str(exc)) from None


def _resolve_k(cfg, arch_label: str, fixture: str | None) -> int:
    if cfg.get("k") is not None:
        return int(cfg["k"])
    if fixture:
        return TUNED_KNN_K.get(arch_label.upper(), {}).get(fixture, 1)
    return 1


def _resolve_classifier(value) -> str:
    if value not in CLASSIFIERS:
        raise ConfigError(f"classifier must be one of {CLASSIFIERS}, got {value!r}")
    return value


def _resolve_grid(cfg) -> Grid:
    spec = cfg.get("grid", "default")
    if spec == "default":
        return default_grid()
    if spec == "coarse":
        return coarse_grid()
    if isinstance(spec, dict):
        try:
            return Grid.from_values(spec["q_values"], spec["b_values"], spec["epsilon_values"])
        except KeyError as exc:
            raise ConfigError(f"grid is missing {exc}") from None
        except (RHNLError, ValueError) as exc:
            raise ConfigError(str(exc)) from None
    raise ConfigError("grid must be 'default', 'coarse' or an object of value lists")


def _common_record(cfg, dataset: Dataset) -> dict:
    keys = ("dataset", "seed", "seeds", "cap", "normalization", "normalize_features")
    record = {k: cfg[k] for k in keys if k in cfg}
    record["dataset_shape"] = [dataset.m, dataset.n]
    record["class_names"] = list(dataset.class_names)
    return record


# --------------------------------------------------------------------------
# Subcommands


def cmd_tune(cfg) -> dict[Path, str]:
    dataset, fixture = _resolve_dataset(cfg)
    arch_label = cfg.get("arch", "RH25L75G")
    arch = _resolve_arch(arch_label)
    split_spec = _resolve_split(cfg, fixture)
    grid = _resolve_grid(cfg)
    folds = int(cfg.get("folds", 5))
    classifier = _resolve_classifier(cfg.get("classifier", "cosine"))

    train, test = split_spec.apply(dataset, cfg["seed"], cfg["normalization"])
    layout = arch.layout(dataset.n, cfg["seed"])
    result = grid_search(train.X, train.y, layout, grid, folds, cfg["cap"], cfg["seed"],
                         num_classes=dataset.num_classes, normalize=cfg["normalize_features"],
                         n_jobs=cfg["jobs"])
    tuned = {
        "best": result.best.as_dict(),
        "best_cv_macro_f1": result.best_cv_macro_f1,
        "grid_points": len(result.table),
        "config": {**_common_record(cfg, dataset), "architecture": arch.name, "classifier": classifier,
                   "folds": folds, "split": split_spec.to_dict(), "grid": grid.to_dict()},
        "layout": layout.to_dict(),
        "split_sha256": split_record(train, test)["sha256"],
    }
    if classifier == "knn":
        F = transform(train.X, layout, result.best, cfg["cap"], normalize=cfg["normalize_features"])
        ks = [k for k in cfg.get("knn_ks", [1, 3, 5]) if k <= train.m - train.m // folds]
        best_k, scores = tune_knn_k(F, train.y, ks, folds, cfg["seed"], dataset.num_classes)
        tuned["knn"] = {"k": best_k, "cv_macro_f1": {str(k): v for k, v in scores.items()}}

    out = Path(cfg["out"])
    k_max = max(len(r.fold_scores) for r in result.table)
    grid_rows = [[r.hyperparams.q, r.hyperparams.b, r.hyperparams.epsilon, r.mean_macro_f1, *r.fold_scores]
                 for r in result.table]
    header = ["q", "b", "epsilon", "mean_macro_f1"] + [f"fold{i}" for i in range(k_max)]
    return {out / "tuned.json": _json_text(tuned), out / "grid.csv": _csv_text(header, grid_rows)}


def cmd_eval(cfg) -> dict[Path, str]:
    dataset, fixture = _resolve_dataset(cfg)
    arch_label = cfg.get("arch", "RH25L75G")
    arch = _resolve_arch(arch_label)
    hp = _resolve_hp(cfg, arch_label, fixture)
    classifier = _resolve_classifier(cfg.get("classifier", "cosine"))
    k = _resolve_k(cfg, arch_label, fixture)
    split_spec = _resolve_split(cfg, fixture)
    result = run_eval(dataset, split_spec, arch, hp, classifier, k, _seed_list(cfg), cfg["cap"],
                      normalization=cfg["normalization"], normalize_features=cfg["normalize_features"],
                      self_test=bool(cfg.get("self_test", False)), n_jobs=cfg["jobs"])
    report = {
        "config": {**_common_record(cfg, dataset), "architecture": arch.name, "hyperparams": hp.as_dict(),
                   "classifier": classifier, "k": k if classifier == "knn" else None,
                   "split": split_spec.to_dict(), "self_test": bool(cfg.get("self_test", False))},
        **result,
    }
    name = cfg.get("report_name", "metrics.json")
    return {Path(cfg["out"]) / name: _json_text(report)}


def cmd_sweep(cfg) -> dict[Path, str]:
    labels = cfg.get("archs")
    if not labels:
        raise ConfigError("sweep needs a non-empty architecture list (--archs or 'archs')")
    classifiers = [_resolve_classifier(c) for c in cfg.get("classifiers", ["cosine"])]
    if not classifiers:
        raise ConfigError("sweep needs at least one classifier")
    dataset, fixture = _resolve_dataset(cfg)
    archs = {}
    for label in labels:
        archs[_resolve_arch(label)] = label
    hps = {a: _resolve_hp(cfg, label, fixture) for a, label in archs.items()}
    ks = {a: _resolve_k(cfg, label, fixture) for a, label in archs.items()}
    rows = run_sweep(dataset, _resolve_split(cfg, fixture), list(archs), classifiers, hps.__getitem__,
                     ks.__getitem__, _seed_list(cfg), cfg["cap"], normalization=cfg["normalization"],
                     normalize_features=cfg["normalize_features"], n_jobs=cfg["jobs"])
    header = ["architecture", "scheme", "proportion_logistic", "classifier", "q", "b", "epsilon",
              "seeds", "median_macro_f1", "mean_macro_f1"]
    body = [[r[h] for h in header] for r in rows]
    return {Path(cfg["out"]) / cfg.get("report_name", "sweep.csv"): _csv_text(header, body)}


def cmd_lowsample(cfg) -> dict[Path, str]:
    dataset, fixture = _resolve_dataset(cfg)
    arch_label = cfg.get("arch", "RH25L75G")
    arch = _resolve_arch(arch_label)
    hp = _resolve_hp(cfg, arch_label, fixture)
    classifier = _resolve_classifier(cfg.get("classifier", "cosine"))
    low = int(cfg.get("min_size", 1))
    high = int(cfg.get("max_size", 15))
    trials = int(cfg.get("trials", 10))
    if not 1 <= low <= high or trials < 1:
        raise ConfigError("need 1 <= min_size <= max_size and trials >= 1")
    if high > min(dataset.class_counts()) - 1:
        raise ConfigError(f"max_size {high} leaves no test rows in the smallest class")
    rows = run_lowsample(dataset, arch, hp, range(low, high + 1), trials, cfg["seed"], classifier,
                         _resolve_k(cfg, arch_label, fixture), cfg["cap"],
                         normalization=cfg["normalization"], normalize_features=cfg["normalize_features"])
    body = [[r["per_class"], r["mean_f1"], r["std"]] for r in rows]
    return {Path(cfg["out"]) / cfg.get("report_name", "lowsample.csv"):
            _csv_text(["per_class", "mean_f1", "std"], body)}


def cmd_lyapunov(cfg) -> dict[Path, str]:
    kind = cfg.get("map", "logistic")
    if kind not in ("logistic", "skew_tent"):
        raise ConfigError("map must be 'logistic' or 'skew_tent'")
    if cfg.get("values"):
        values = [float(v) for v in cfg["values"]]
    else:
        start = float(cfg.get("start", 3.5 if kind == "logistic" else 0.05))
        stop = float(cfg.get("stop", 4.0 if kind == "logistic" else 0.95))
        num = int(cfg.get("num", 51 if kind == "logistic" else 19))
        if num < 1:
            raise ConfigError("num must be >= 1")
        values = np.linspace(start, stop, num).round(12).tolist()
    try:
        rows = run_lyapunov(kind, values, float(cfg.get("x0", 0.01)), int(cfg.get("iterations", 100_000)),
                            int(cfg.get("burn_in", 0)))
    except RHNLError as exc:
        raise ConfigError(str(exc)) from None
    body = [[r["parameter"], r["lyapunov"]] for r in rows]
    return {Path(cfg["out"]) / cfg.get("report_name", "lyapunov.csv"): _csv_text(["parameter", "lyapunov"], body)}


def cmd_export_features(cfg) -> dict[Path, str]:
    dataset, fixture = _resolve_dataset(cfg)
    arch_label = cfg.get("arch", "RH25L75G")
    arch = _resolve_arch(arch_label)
    hp = _resolve_hp(cfg, arch_label, fixture)
    split_spec = _resolve_split(cfg, fixture)
    seed = cfg["seed"]
    train, test = split_spec.apply(dataset, seed, cfg["normalization"])
    layout = arch.layout(dataset.n, seed)
    stats = TransformStats()
    out = Path(cfg["out"])
    outputs = {}

    def render(part: Dataset) -> str:
        F = transform(part.X, layout, hp, cfg["cap"], normalize=cfg["normalize_features"],
                      n_jobs=cfg["jobs"], stats=stats)
        buf = io.StringIO()
        write_features_csv(buf, F, part.y)
        return buf.getvalue()

    outputs[out / "train_features.csv"] = render(train)
    if test.m:
        outputs[out / "test_features.csv"] = render(test)
    provenance = {
        "config": {**_common_record(cfg, dataset), "architecture": arch.name, "hyperparams": hp.as_dict(),
                   "split": split_spec.to_dict()},
        "layout": layout.to_dict(),
        "split": split_record(train, test),
        "feature_columns": 4 * dataset.n,
        "undetected_traces": stats.undetected,
        "files": sorted(p.name for p in outputs),
    }
    outputs[out / "features.json"] = _json_text(provenance)
    return outputs


COMMANDS = {
    "tune": cmd_tune,
    "eval": cmd_eval,
    "sweep": cmd_sweep,
    "lowsample": cmd_lowsample,
    "lyapunov": cmd_lyapunov,
    "export-features": cmd_export_features,
}


# --------------------------------------------------------------------------
# Argument parsing


def _add_common(p: argparse.ArgumentParser) -> None:
    # Defaults stay None so unset flags never override the config file.
    p.add_argument("--config", help="JSON config file; flags override its keys")
    p.add_argument("--seed", type=int, help="experiment seed (default 0)")
    p.add_argument("--cap", type=int, help=f"firing-time cap per trace (default {DEFAULT_CAP})")
    p.add_argument("--out", help="output directory (default ./results)")
    p.add_argument("-v", "--verbose", action="store_true")


def _add_data(p: argparse.ArgumentParser) -> None:
    p.add_argument("--dataset", help="fixture name, CSV path, or 'synthetic'")
    p.add_argument("--data-dir", dest="data_dir", help="directory holding fixture CSVs")
    p.add_argument("--normalization", choices=["global", "train"])
    p.add_argument("--raw-features", dest="normalize_features", action="store_const", const=False,
                   help="keep firing time and energy unnormalized")
    p.add_argument("--jobs", type=int, help="worker threads for the feature transform")


def _add_model(p: argparse.ArgumentParser) -> None:
    p.add_argument("--arch", help="architecture label, e.g. RH25L75G, GLS, Logistic, HNL")
    p.add_argument("--q", type=float)
    p.add_argument("--b", type=float)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--classifier", choices=CLASSIFIERS)
    p.add_argument("--k", type=int, help="neighbours for the kNN classifier")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rhnl", description="Neurochaos feature extraction experiments.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("tune", help="grid search (q, b, epsilon) by stratified k-fold CV")
    _add_common(p), _add_data(p), _add_model(p)
    p.add_argument("--folds", type=int)
    p.add_argument("--grid", choices=["default", "coarse"])

    p = sub.add_parser("eval", help="train and test one configuration")
    _add_common(p), _add_data(p), _add_model(p)
    p.add_argument("--seeds", type=int, help="number of consecutive seeds to run (default 1)")
    p.add_argument("--self-test", dest="self_test", action="store_const", const=True,
                   help="score the training rows instead of the test rows")

    p = sub.add_parser("sweep", help="evaluate several architectures and classifiers")
    _add_common(p), _add_data(p), _add_model(p)
    p.add_argument("--archs", nargs="+")
    p.add_argument("--classifiers", nargs="+", choices=CLASSIFIERS)
    p.add_argument("--seeds", type=int)

    p = sub.add_parser("lowsample", help="macro F1 against training samples per class")
    _add_common(p), _add_data(p), _add_model(p)
    p.add_argument("--trials", type=int)
    p.add_argument("--min-size", dest="min_size", type=int)
    p.add_argument("--max-size", dest="max_size", type=int)

    p = sub.add_parser("lyapunov", help="Lyapunov exponent sweep")
    _add_common(p)
    p.add_argument("--map", choices=["logistic", "skew_tent"])
    p.add_argument("--values", type=float, nargs="+")
    p.add_argument("--start", type=float)
    p.add_argument("--stop", type=float)
    p.add_argument("--num", type=int)
    p.add_argument("--x0", type=float)
    p.add_argument("--iterations", type=int)

    p = sub.add_parser("export-features", help="write ChaosFEX train/test feature CSVs")
    _add_common(p), _add_data(p), _add_model(p)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        cfg = _merge(args)
        outputs = COMMANDS[args.command](cfg)
        _write_outputs(outputs)
    except (ConfigError, ParameterError, SplitError) as exc:
        print(f"rhnl {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except (RHNLError, OSError) as exc:
        print(f"rhnl {args.command}: failed: {exc}", file=sys.stderr)
        return 1
    for path in outputs:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
