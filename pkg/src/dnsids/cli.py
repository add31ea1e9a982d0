"""Command-line front end wiring the pipeline stages together.

Subcommands: simulate, features, train, evaluate, sweep, pipeline. Every
output is a pure function of the config file and master seed; outputs
embed both in a header comment. Logs go to stderr, data to files. Exit
codes: 0 success, 2 configuration error, 3 parse error, 4 training error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

from . import errors
from .classifiers.recipes import MlpRecipe, RbfRecipe, SomRecipe
from .classifiers.store import save_model
from .config import (DEFAULT_CONFIG, PipelineConfig, config_digest,
                     parse_pipeline_config, validate_for_training)
from .evaluation import (EvalReport, cross_validate, dataset_fingerprint,
                         kfold_split, render_report, render_sweep_csv,
                         sweep_hidden_neurons)
from .preproc import (LabeledDataset, label_windows, merge_datasets, read_dataset,
                      window_trace, write_dataset)
from .seeding import derive_seed
from .simnet import read_trace, run, write_trace

log = logging.getLogger("dnsids")

_TRAINING_ERRORS = (
    errors.TrainingError, errors.Empty, errors.EmptyData, errors.TooFewPoints,
    errors.NeedTwoCenters, errors.DegenerateDesign, errors.SingularUpdate,
    errors.InvalidWidth, errors.TooFewSamples, errors.LengthMismatch,
    errors.UndefinedMetric, errors.Unlabeled, errors.ZeroVector,
)


def _load_config(path: str | None, seed_override: int | None) -> tuple[PipelineConfig, str]:
    if path is None:
        text = DEFAULT_CONFIG
    else:
        p = Path(path)
        if not p.exists():
            raise errors.ConfigError(f"config file not found: {path}")
        text = p.read_text(encoding="utf-8")
    cfg = parse_pipeline_config(text)
    if seed_override is not None:
        cfg = replace(cfg, seed=seed_override)
    return cfg, config_digest(text)


def _stamp(seed: int, digest: str) -> tuple[str, ...]:
    return (f"master_seed={seed}", f"config_digest={digest}")


def _build_recipes(cfg: PipelineConfig, names) -> list:
    recipes = []
    for name in names:
        if name == "mlp":
            recipes.append(MlpRecipe(hidden=cfg.mlp.hidden, train_config=cfg.mlp.train))
        elif name == "rbf":
            recipes.append(RbfRecipe(centers=cfg.rbf_centers))
        elif name == "som":
            recipes.append(SomRecipe(train_config=cfg.som))
        else:
            raise errors.ConfigError(f"unknown classifier {name!r}")
    return recipes


# --- stages (shared by the individual commands and `pipeline`) ---------------

def do_simulate(cfg: PipelineConfig, out: Path, digest: str) -> list[Path]:
    if not cfg.scenarios:
        raise errors.ConfigError("no [scenario.*] sections to simulate")
    trace_dir = out / "traces"
    trace_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for block in cfg.scenarios:
        for r in range(block.runs):
            seed = derive_seed(cfg.seed, "simulate", block.name, r)
            trace = run(block.config, seed)
            text = write_trace(trace)
            stamped = (f"#master_seed={cfg.seed}\n#config_digest={digest}\n" + text)
            path = trace_dir / f"{block.name}-{r:03d}.trace"
            path.write_text(stamped, encoding="utf-8")
            paths.append(path)
            log.info("simulated %s: %d events, %d dropped", path.name,
                     len(trace.events),
                     sum(1 for e in trace.events if e.disposition.value == "dropped_at_queue"))
    return paths


def do_features(trace_paths: list[Path], out: Path, seed: int, digest: str) -> Path:
    if not trace_paths:
        raise errors.ConfigError("no trace files given")
    parts = []
    for path in sorted(trace_paths):
        trace = read_trace(path.read_text(encoding="utf-8"))
        window_len = trace.config.window_len
        windows = window_trace(trace, window_len)
        parts.append(label_windows(windows, trace.truth, window_len,
                                   provenance=(path.name,)))
    dataset = merge_datasets(parts)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "dataset.csv"
    path.write_text(write_dataset(dataset, comments=_stamp(seed, digest)),
                    encoding="utf-8")
    log.info("wrote %s: %d windows from %d traces", path, len(dataset), len(parts))
    return path


def do_evaluate(dataset_path: Path, cfg: PipelineConfig, names, out: Path,
                digest: str) -> tuple[Path, Path]:
    data = read_dataset(dataset_path.read_text(encoding="utf-8"))
    if len(data) == 0:
        raise errors.Empty("dataset has no samples")
    plan = kfold_split(data, cfg.cv_folds, derive_seed(cfg.seed, "kfold"))
    entries = []
    for recipe in _build_recipes(cfg, names):
        log.info("cross-validating %s (%d folds)", recipe.name, cfg.cv_folds)
        entries.append(cross_validate(recipe, data, k=cfg.cv_folds, seed=cfg.seed))
    report = EvalReport(
        entries=tuple(entries),
        dataset_fingerprint=dataset_fingerprint(write_dataset(data)),
        seed=cfg.seed,
        folds=cfg.cv_folds,
        stratified=plan.stratified,
    )
    text, _ = render_report(report, stable_times=False)
    _, csv_stable = render_report(report, stable_times=True)
    out.mkdir(parents=True, exist_ok=True)
    comment = (f"# master_seed={cfg.seed} config_digest={digest} "
               f"dataset={report.dataset_fingerprint} folds={cfg.cv_folds}\n")
    csv_path = out / "report.csv"
    csv_path.write_text(comment + csv_stable, encoding="utf-8")
    txt_path = out / "report.txt"
    txt_path.write_text(comment + text, encoding="utf-8")
    sys.stdout.write(text)
    return csv_path, txt_path


# --- commands ----------------------------------------------------------------

def cmd_simulate(args) -> int:
    cfg, digest = _load_config(args.config, args.seed)
    do_simulate(cfg, Path(args.out), digest)
    return 0


def cmd_features(args) -> int:
    cfg, digest = _load_config(args.config, args.seed)
    trace_dir = Path(args.traces)
    if not trace_dir.is_dir():
        raise errors.ConfigError(f"trace directory not found: {trace_dir}")
    paths = sorted(trace_dir.glob("*.trace"))
    do_features(paths, Path(args.out), cfg.seed, digest)
    return 0


def cmd_train(args) -> int:
    cfg, digest = _load_config(args.config, args.seed)
    data = read_dataset(Path(args.dataset).read_text(encoding="utf-8"))
    if len(data) == 0:
        raise errors.Empty("dataset has no samples")
    recipe = _build_recipes(cfg, [args.classifier])[0]
    model, report = recipe.train(data, derive_seed(cfg.seed, recipe.name, "train"))
    train_cfg = {"mlp": cfg.mlp.train, "som": cfg.som, "rbf": None}[args.classifier]
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"model_{args.classifier}.json"
    path.write_text(save_model(model, train_cfg, report,
                               extra={"master_seed": cfg.seed, "config_digest": digest}),
                    encoding="utf-8")
    log.info("trained %s: mse=%.6g epochs=%d wall=%.2fs converged=%s",
             args.classifier, report.final_mse, report.epochs_run,
             report.wall_time, report.converged)
    return 0


def cmd_evaluate(args) -> int:
    cfg, digest = _load_config(args.config, args.seed)
    names = cfg.classifier_names if args.classifier == "all" else (args.classifier,)
    if args.k is not None:
        cfg = replace(cfg, cv_folds=args.k)
    do_evaluate(Path(args.dataset), cfg, names, Path(args.out), digest)
    return 0


def cmd_sweep(args) -> int:
    cfg, digest = _load_config(args.config, args.seed)
    data = read_dataset(Path(args.dataset).read_text(encoding="utf-8"))
    widths = [int(w) for w in args.widths.split(",")]
    rows = sweep_hidden_neurons(data, widths, cfg.seed, k=cfg.cv_folds,
                                train_config=cfg.mlp.train)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "sweep.csv"
    comment = f"# master_seed={cfg.seed} config_digest={digest}\n"
    path.write_text(comment + render_sweep_csv(rows), encoding="utf-8")
    log.info("wrote %s (%d widths)", path, len(rows))
    return 0


def cmd_pipeline(args) -> int:
    cfg, digest = _load_config(args.config, args.seed)
    validate_for_training(cfg)
    out = Path(args.out)
    trace_paths = do_simulate(cfg, out, digest)
    dataset_path = do_features(trace_paths, out, cfg.seed, digest)
    do_evaluate(dataset_path, cfg, cfg.classifier_names, out, digest)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dnsids",
        description="Simulate DNS DoS traffic, extract windowed features, "
                    "and compare neural attack classifiers.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="pipeline config file (bundled default if omitted)")
        p.add_argument("--seed", type=int, help="override the master seed")
        p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("simulate", help="run all scenario blocks, write trace files")
    common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("features", help="window traces into a labeled dataset CSV")
    common(p)
    p.add_argument("--traces", required=True, help="directory of .trace files")
    p.set_defaults(func=cmd_features)

    p = sub.add_parser("train", help="train one classifier on a dataset")
    common(p)
    p.add_argument("--dataset", required=True)
    p.add_argument("--classifier", choices=("mlp", "rbf", "som"), default="mlp")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="cross-validate classifiers, write the report")
    common(p)
    p.add_argument("--dataset", required=True)
    p.add_argument("--classifier", choices=("mlp", "rbf", "som", "all"), default="all")
    p.add_argument("--k", type=int, help="cross-validation folds")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("sweep", help="hidden-width sweep of the feed-forward net")
    common(p)
    p.add_argument("--dataset", required=True)
    p.add_argument("--widths", default="3,5,7,9,11,13,15,17,19,21",
                   help="comma-separated hidden widths")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("pipeline", help="simulate, extract features, and evaluate")
    common(p)
    p.set_defaults(func=cmd_pipeline)

    return parser


def _fail(kind: str, exc: Exception, code: int) -> int:
    sys.stderr.write(json.dumps({"error": kind, "detail": str(exc)}) + "\n")
    return code


def main(argv=None) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.INFO,
                        format="%(levelname)s %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (errors.ConfigError, errors.InvalidConfig) as exc:
        return _fail(type(exc).__name__, exc, 2)
    except FileNotFoundError as exc:
        return _fail("ConfigError", exc, 2)
    except errors.ParseError as exc:
        return _fail("ParseError", exc, 3)
    except _TRAINING_ERRORS as exc:
        return _fail(type(exc).__name__, exc, 4)


if __name__ == "__main__":
    sys.exit(main())
