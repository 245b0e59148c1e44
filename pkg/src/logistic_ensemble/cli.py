"""Command-line runner: ``prepare``, ``train``, ``evaluate``, ``gradcheck``.

A run lives in one output directory::

    config.json            resolved configuration
    augmented.csv          augmented raw table (same header as the input)
    split.json             train/test row indices into augmented.csv
    standardization.json   per-feature means and stds fitted on augmented.csv
    balance.json           row counts and class balance
    model_n<k>.json        trained weights for a k-layer ensemble
    cost_n<k>.csv          iteration,cost
    metrics_n<k>.json      train_accuracy, test_accuracy, test_auc, test_recall, test_precision
    roc_n<k>.csv           fpr,tpr,threshold

Exit codes: 0 success, 2 configuration or data error, 3 numeric failure,
4 gradient tolerance breach, 5 probability tolerance breach.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import data as dp
from .gradient import batch_gradient, finite_difference_gradient
from .metrics import MetricError, evaluate_scores, write_metrics_json, write_roc_csv
from .model import EnsembleModel, InvalidArgumentError
from .probability import label_probability, mixture_oracle, predict_proba
from .trainer import DivergenceError, TrainConfig, train, write_cost_history

log = logging.getLogger("logistic_ensemble")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_GRADIENT, EXIT_PROBABILITY = 0, 2, 3, 4, 5

DEFAULTS = {
    "data": None,  # None -> bundled UCI red-wine file
    "target_column": "quality",
    "threshold": 6,
    "exclude_columns": list(dp.WINE_EXCLUDED),
    "augment_fraction": 0.1,
    "augment_shift": True,
    "standardize_first": False,
    "train_ratio": 0.8,
    "layers": [1, 2, 3, 4],
    "learning_rate": 0.001,
    "iterations": 5000,
    "init_scale": 0.01,
    "cost_record_stride": 1,
    "early_stop": False,
    "decision_threshold": 0.5,
}
DATA_KEYS = (
    "data", "target_column", "threshold", "exclude_columns", "augment_fraction", "augment_shift",
    "standardize_first", "train_ratio", "augment_seed", "split_seed",
)


class ConfigError(Exception):
    pass


def _parse_layers(text: str) -> list[int]:
    try:
        if "-" in text and "," not in text:
            lo, hi = (int(v) for v in text.split("-"))
            layers = list(range(lo, hi + 1))
        else:
            layers = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad layer list {text!r}; use e.g. 1,2,3,4") from None
    if not layers or min(layers) < 1:
        raise argparse.ArgumentTypeError("layer values must be >= 1")
    return layers


def resolve_config(args, base: dict | None = None) -> dict:
    """Merge defaults, a base config (previous run), ``--config`` and flags."""
    cfg = dict(DEFAULTS)
    if base:
        cfg.update(base)
    if getattr(args, "config", None):
        try:
            user = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(user, dict):
            raise ConfigError("config must be a JSON object")
        unknown = set(user) - set(DEFAULTS) - {"seed", "augment_seed", "split_seed"}
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        if "seed" not in user:
            raise ConfigError("config must set 'seed'")
        cfg.update(user)
    flags = {
        "layers": getattr(args, "layers", None),
        "seed": getattr(args, "seed", None),
        "threshold": getattr(args, "threshold", None),
        "learning_rate": getattr(args, "lr", None),
        "iterations": getattr(args, "iters", None),
    }
    cfg.update({k: v for k, v in flags.items() if v is not None})
    if cfg.get("seed") is None:
        raise ConfigError("a seed is required: set 'seed' in --config or pass --seed")
    cfg.setdefault("augment_seed", cfg["seed"])
    cfg.setdefault("split_seed", cfg["seed"])
    if any(int(n) < 1 for n in cfg["layers"]):
        raise ConfigError("layer values must be >= 1")
    for key in ("seed", "augment_seed", "split_seed"):
        if not 0 <= int(cfg[key]) < 2**64:
            raise ConfigError(f"{key} must be an unsigned 64-bit integer")
    return cfg


def _data_path(cfg: dict) -> Path:
    return Path(cfg["data"]) if cfg["data"] else dp.bundled_path()


def _write_config(out: Path, cfg: dict) -> None:
    (out / "config.json").write_text(json.dumps(cfg, indent=1, sort_keys=True) + "\n")


def _run_config(args) -> tuple[Path, dict]:
    out = Path(args.out)
    saved = out / "config.json"
    if not saved.is_file():
        raise ConfigError(f"{saved} not found; run 'prepare' with --out {out} first")
    base = json.loads(saved.read_text())
    cfg = resolve_config(args, base)
    # the prepared files were built from these; later commands cannot change them
    for key in DATA_KEYS:
        cfg[key] = base[key]
    return out, cfg


def _load_prepared(out: Path, cfg: dict) -> dp.PreparedData:
    return dp.load_prepared(out, cfg["target_column"], cfg["threshold"])


def cmd_prepare(args) -> int:
    cfg = resolve_config(args)
    out = Path(args.out)
    try:
        prep = dp.prepare(
            _data_path(cfg),
            cfg["target_column"],
            cfg["threshold"],
            fraction=cfg["augment_fraction"],
            augment_seed=int(cfg["augment_seed"]),
            split_seed=int(cfg["split_seed"]),
            train_ratio=cfg["train_ratio"],
            exclude=tuple(cfg["exclude_columns"]),
            shift=cfg["augment_shift"],
            standardize_first=cfg["standardize_first"],
        )
    except dp.DataError as exc:
        raise ConfigError(f"prepare: {exc}") from None
    out.mkdir(parents=True, exist_ok=True)
    _write_config(out, cfg)
    report = dp.save_prepared(prep, out, cfg["threshold"])
    print(
        f"augmented rows: {report['augmented_rows']}  train: {report['train_rows']}  "
        f"test: {report['test_rows']}  features: {report['feature_dim']}"
    )
    bal = report["balance"]["all"]
    print(f"class balance: 0 -> {bal['counts'][0]} ({bal['proportions'][0]:.3f}), "
          f"1 -> {bal['counts'][1]} ({bal['proportions'][1]:.3f})")
    return EXIT_OK


def cmd_train(args) -> int:
    out, cfg = _run_config(args)
    try:
        prep = _load_prepared(out, cfg)
    except dp.DataError as exc:
        raise ConfigError(f"train: {exc}") from None
    _write_config(out, cfg)
    for n in cfg["layers"]:
        tc = TrainConfig(
            learning_rate=cfg["learning_rate"],
            iterations=cfg["iterations"],
            init_scale=cfg["init_scale"],
            seed=int(cfg["seed"]),
            cost_record_stride=cfg["cost_record_stride"],
            early_stop=cfg["early_stop"],
        )
        result = train(prep.train, tc, n)
        result.model.save(out / f"model_n{n}.json")
        write_cost_history(out / f"cost_n{n}.csv", result.cost_history)
        print(f"n={n}: {result.converged_iterations} iterations, final cost {result.final_cost:.6f} "
              f"({result.final_cost / len(prep.train):.6f} per sample)")
    return EXIT_OK


def evaluate_model(model: EnsembleModel, prep: dp.PreparedData, decision_threshold: float = 0.5):
    """Table-style metrics dict plus the test ROC curve."""
    if model.feature_dim != prep.train.dim:
        raise ConfigError(f"model expects {model.feature_dim} features but the data has {prep.train.dim}")
    train_rep, _ = evaluate_scores(predict_proba(model, prep.train.features), prep.train.labels, decision_threshold)
    test_rep, curve = evaluate_scores(predict_proba(model, prep.test.features), prep.test.labels, decision_threshold)
    metrics = {
        "train_accuracy": train_rep.accuracy,
        "test_accuracy": test_rep.accuracy,
        "test_auc": test_rep.auc,
        "test_recall": test_rep.recall,
        "test_precision": test_rep.precision,
    }
    return metrics, curve


def cmd_evaluate(args) -> int:
    out, cfg = _run_config(args)
    try:
        prep = _load_prepared(out, cfg)
    except dp.DataError as exc:
        raise ConfigError(f"evaluate: {exc}") from None
    paths = [Path(p) for p in args.model] if args.model else [out / f"model_n{n}.json" for n in cfg["layers"]]
    print(f"{'model':<16}{'train_acc':>10}{'test_acc':>10}{'test_auc':>10}{'recall':>10}{'precision':>10}")
    for path in paths:
        if not path.is_file():
            raise ConfigError(f"model file {path} not found; run 'train' first")
        try:
            model = EnsembleModel.load(path)
        except (InvalidArgumentError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot load {path}: {exc}") from None
        metrics, curve = evaluate_model(model, prep, cfg["decision_threshold"])
        stem = path.stem.replace("model_", "")
        write_metrics_json(out / f"metrics_{stem}.json", metrics)
        write_roc_csv(out / f"roc_{stem}.csv", curve)
        cells = "".join(f"{'undef' if v is None else format(v, '.4f'):>10}" for v in metrics.values())
        print(f"{path.name:<16}{cells}")
    return EXIT_OK


def gradcheck(n_layers: int, feature_dim: int = 10, seed: int = 0, points: int = 16,
              step: float = 1e-6, corrupt: str | None = None) -> dict:
    """Random model and data; compare analytical vs finite-difference gradients
    and recursive vs enumerated probabilities."""
    rng = np.random.Generator(np.random.PCG64(seed))
    W = rng.standard_normal((2**n_layers - 1, feature_dim + 1))
    model = EnsembleModel(n_layers, feature_dim, W)
    ds = dp.Dataset(rng.standard_normal((points, feature_dim)), rng.integers(0, 2, points))
    g = batch_gradient(model, ds)
    if corrupt == "gradient":
        g = g.copy()
        g[-1, -1] *= 1.01
    fd = finite_difference_gradient(model, ds, step)
    big = np.abs(g) > 1e-8
    rel = np.abs(g - fd)[big] / np.maximum(np.abs(g), np.abs(fd))[big]
    prob = max(
        abs(label_probability(model, x, y) - mixture_oracle(model, x, y))
        for x in ds.features
        for y in (0, 1)
    )
    if corrupt == "probability":
        prob += 1e-9
    return {"n_layers": n_layers, "grad_rel_err": float(rel.max(initial=0.0)), "prob_abs_diff": float(prob)}


def cmd_gradcheck(args) -> int:
    layers = args.layers or [1, 2, 3, 4, 5]
    seed = 0 if args.seed is None else args.seed
    status = EXIT_OK
    for n in layers:
        r = gradcheck(n, args.feature_dim, seed, args.points, args.step, args.corrupt)
        grad_ok = r["grad_rel_err"] <= args.grad_tol
        prob_ok = r["prob_abs_diff"] <= args.prob_tol
        print(f"n={n}: gradient max rel err {r['grad_rel_err']:.3e} [{'ok' if grad_ok else 'FAIL'}]  "
              f"probability max diff {r['prob_abs_diff']:.3e} [{'ok' if prob_ok else 'FAIL'}]")
        if not grad_ok:
            status = EXIT_GRADIENT
        elif not prob_ok and status == EXIT_OK:
            status = EXIT_PROBABILITY
    return status


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="logistic-ensemble", description=__doc__.split("\n\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, out_required=True):
        p.add_argument("--config", help="JSON run configuration")
        p.add_argument("--out", required=out_required, help="run directory")
        p.add_argument("--seed", type=int)
        p.add_argument("--layers", type=_parse_layers, help="e.g. 1,2,3,4 or 1-4")

    p = sub.add_parser("prepare", help="load, encode, augment, standardize and split the data")
    common(p)
    p.add_argument("--threshold", type=int, help="label 1 iff target >= threshold")
    p.set_defaults(func=cmd_prepare)

    p = sub.add_parser("train", help="train one ensemble per layer count")
    common(p)
    p.add_argument("--lr", type=float)
    p.add_argument("--iters", type=int)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="write metrics and ROC curves for trained models")
    common(p)
    p.add_argument("--model", action="append", help="model JSON (repeatable); default: every trained layer")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("gradcheck", help="verify gradients and probabilities on a random problem")
    p.add_argument("--layers", type=_parse_layers)
    p.add_argument("--seed", type=int)
    p.add_argument("--feature-dim", type=int, default=10)
    p.add_argument("--points", type=int, default=16)
    p.add_argument("--step", type=float, default=1e-6)
    p.add_argument("--grad-tol", type=float, default=1e-6)
    p.add_argument("--prob-tol", type=float, default=1e-12)
    # negative-control hook for tests
    p.add_argument("--corrupt", choices=["gradient", "probability"], help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_gradcheck)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ConfigError, dp.DataError, MetricError, InvalidArgumentError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DivergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
