"""Command-line front end: ``exhaust-sentinel <command>``.

Commands:
    simulate   write a synthetic labeled dataset CSV
    train      fit the full learned-feature chain, write a model JSON
    features   write hand-crafted or learned feature CSVs
    evaluate   cross-validate hand vs learned pipelines, write report + ROC SVG
    score      score records with a saved model

Exit codes: 0 success, 1 runtime or I/O failure, 2 usage error.

Configuration precedence, lowest to highest: built-in defaults, then a
``--config`` file of flat ``key=value`` lines (``#`` comments allowed), then
explicit flags.  ``exhaust-sentinel train --help`` lists the flags; config
keys mirror :meth:`PipelineConfig.to_items` (e.g. ``dae.learning_rate=0.02``).
"""

from __future__ import annotations

import argparse
import io
import os
import sys
from dataclasses import replace
from typing import Sequence

import numpy as np

from ._ioutil import atomic_write_text
from .dae import write_loss_csv
from .evaluation import (
    repeated_stratified_cv,
    write_report_csv,
    write_roc_points_csv,
    write_roc_svg,
    write_summary_csv,
)
from .features_hand import HAND_FEATURE_NAMES, hand_feature_matrix
from .pipeline import (
    PipelineConfig,
    fit_unsupervised,
    learned_features,
    load_model,
    make_hand_pipeline,
    make_learned_pipeline,
    read_config_file,
    save_model,
    score_records,
    train_bundle,
)
from .profiles import TcRecord, filter_records, load_csv, save_csv
from .simdata import DEFAULT_FAULTS, FaultDistribution, SimConfig, gen_dataset


class _UsageError(Exception):
    def __init__(self, message: str, parser: argparse.ArgumentParser):
        super().__init__(message)
        self.parser = parser


class _Parser(argparse.ArgumentParser):
    """ArgumentParser that reports usage problems instead of exiting."""

    def error(self, message: str):  # noqa: D102 - argparse hook
        raise _UsageError(message, self)


def _build_parser() -> _Parser:
    parser = _Parser(prog="exhaust-sentinel", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="write a synthetic dataset CSV")
    sim.add_argument("--out", required=True, help="output dataset CSV path")
    sim.add_argument("--seed", type=int, default=0, help="simulator seed")
    sim.add_argument("--n-cans", type=int, default=27)
    sim.add_argument("--n-normal", type=int, default=5000)
    sim.add_argument("--n-fault", type=int, default=100)
    sim.add_argument("--fault-kind", choices=("cold", "hot"), default=None,
                     help="override the fault sign")
    sim.add_argument("--fault-depth", type=float, default=None,
                     help="fix the fault depth in degF instead of sampling")
    sim.add_argument("--fault-width", type=float, default=None,
                     help="fix the fault width in cans instead of sampling")

    def common(p: argparse.ArgumentParser, with_eval: bool = False) -> None:
        p.add_argument("--config", default=None,
                       help="flat key=value config file")
        p.add_argument("--seed", type=int, default=None,
                       help="master seed (overrides config)")
        p.add_argument("--tnh-min", type=float, default=None,
                       help="part-load cutoff in %% speed (overrides config)")
        if with_eval:
            p.add_argument("--folds", type=int, default=None)
            p.add_argument("--runs", type=int, default=None)
            p.add_argument("--sdae-scope", choices=("global", "per-fold"),
                           default=None)

    train = sub.add_parser("train", help="fit and save a model bundle")
    train.add_argument("--data", required=True, help="training dataset CSV")
    train.add_argument("--out", required=True, help="output model JSON path")
    common(train)

    feats = sub.add_parser("features", help="write feature CSVs")
    feats.add_argument("--data", required=True, help="dataset CSV")
    feats.add_argument("--set", required=True, choices=("hand", "learned"),
                       dest="feature_set")
    feats.add_argument("--model", default=None,
                       help="model JSON (required for --set learned)")
    feats.add_argument("--out", required=True, help="output feature CSV path")
    feats.add_argument("--tnh-min", type=float, default=95.0,
                       help="part-load cutoff for --set hand (learned "
                            "features use the cutoff stored in the model)")

    ev = sub.add_parser("evaluate",
                        help="cross-validate hand vs learned pipelines")
    ev.add_argument("--data", required=True, help="labeled dataset CSV")
    ev.add_argument("--out", required=True,
                    help="output directory for report CSVs and the ROC SVG")
    ev.add_argument("--features", choices=("hand", "learned", "both"),
                    default="both", help="which pipelines to evaluate")
    common(ev, with_eval=True)

    sc = sub.add_parser("score", help="score records with a saved model")
    sc.add_argument("--data", required=True, help="dataset CSV")
    sc.add_argument("--model", required=True, help="model JSON path")
    sc.add_argument("--out", required=True, help="output scores CSV path")

    return parser


def _resolve_config(args: argparse.Namespace) -> PipelineConfig:
    """defaults < config file < explicit flags."""
    if getattr(args, "config", None):
        config = PipelineConfig.from_items(read_config_file(args.config))
    else:
        config = PipelineConfig()
    overrides = {}
    for flag, field_name in (
        ("seed", "seed"),
        ("tnh_min", "tnh_min"),
        ("folds", "folds"),
        ("runs", "runs"),
        ("sdae_scope", "sdae_scope"),
    ):
        value = getattr(args, flag, None)
        if value is not None:
            overrides[field_name] = value
    return replace(config, **overrides) if overrides else config


def _fmt(x: float) -> str:
    return repr(float(x))


def _cmd_simulate(args: argparse.Namespace) -> int:
    cfg = SimConfig(
        n_cans=args.n_cans,
        n_normal=args.n_normal,
        n_fault=args.n_fault,
        seed=args.seed,
    )
    faults = DEFAULT_FAULTS
    if args.fault_kind is not None:
        faults = replace(faults, kind=args.fault_kind)
    if args.fault_depth is not None:
        faults = replace(faults, depth_range=(args.fault_depth, args.fault_depth))
    if args.fault_width is not None:
        faults = replace(faults, width_range=(args.fault_width, args.fault_width))
    dataset = gen_dataset(cfg, faults)
    save_csv(dataset, args.out)
    print(f"wrote {len(dataset.records)} records "
          f"({cfg.n_normal} normal, {cfg.n_fault} event) to {args.out}")
    return 0


def _cmd_train(args: argparse.Namespace) -> int:
    config = _resolve_config(args)
    dataset = load_csv(args.data)
    loss_log: list[np.ndarray] = []
    bundle = train_bundle(dataset.records, config, loss_log)
    save_model(bundle, args.out)
    base = os.path.splitext(args.out)[0]
    for i, losses in enumerate(loss_log, start=1):
        write_loss_csv(losses, f"{base}.layer{i}_loss.csv")
    print(f"trained on {len(dataset.records)} records; model -> {args.out}")
    return 0


def _write_feature_csv(path: str, names: Sequence[str],
                       records: Sequence[TcRecord],
                       matrix: np.ndarray) -> None:
    buf = io.StringIO()
    buf.write("timestamp,label," + ",".join(names) + "\n")
    for rec, row in zip(records, matrix):
        buf.write(f"{_fmt(rec.timestamp)},{rec.label},"
                  + ",".join(_fmt(v) for v in row) + "\n")
    atomic_write_text(path, buf.getvalue())


def _cmd_features(args: argparse.Namespace) -> int:
    dataset = load_csv(args.data)
    if args.feature_set == "hand":
        kept = filter_records(dataset.records, args.tnh_min)
        matrix = hand_feature_matrix(kept)
        names: Sequence[str] = HAND_FEATURE_NAMES
    else:
        bundle = load_model(args.model)
        kept, matrix = learned_features(bundle, dataset.records)
        names = [f"f_{i + 1:02d}" for i in range(matrix.shape[1])]
    _write_feature_csv(args.out, names, kept, matrix)
    print(f"wrote {len(kept)} feature rows to {args.out}")
    return 0


def _cmd_score(args: argparse.Namespace) -> int:
    bundle = load_model(args.model)
    dataset = load_csv(args.data)
    kept, scores = score_records(bundle, dataset.records)
    buf = io.StringIO()
    buf.write("timestamp,score,label\n")
    for rec, s in zip(kept, scores):
        buf.write(f"{_fmt(rec.timestamp)},{_fmt(s)},{rec.label}\n")
    atomic_write_text(args.out, buf.getvalue())
    print(f"scored {len(kept)} records -> {args.out}")
    return 0


def _cmd_evaluate(args: argparse.Namespace) -> int:
    config = _resolve_config(args)
    dataset = load_csv(args.data)
    records = filter_records(dataset.records, config.tnh_min)

    pipelines = {}
    if args.features in ("hand", "both"):
        pipelines["hand"] = make_hand_pipeline(config)
    if args.features in ("learned", "both"):
        unsupervised = None
        if config.sdae_scope == "global":
            unsupervised = fit_unsupervised(records, config, config.seed)
        pipelines["learned"] = make_learned_pipeline(config, unsupervised)

    reports = {
        name: repeated_stratified_cv(records, config.folds, config.runs,
                                     pipe, config.seed)
        for name, pipe in pipelines.items()
    }

    os.makedirs(args.out, exist_ok=True)
    write_report_csv(reports, os.path.join(args.out, "report.csv"))
    write_summary_csv(reports, os.path.join(args.out, "summary.csv"))
    write_roc_points_csv(reports, os.path.join(args.out, "roc_points.csv"))
    write_roc_svg(reports, os.path.join(args.out, "roc_comparison.svg"))

    print(f"{'feature_set':<12} {'auc':>8} {'±':>8} "
          f"{'tpr@1%fpr':>10} {'±':>8}")
    for name in sorted(reports):
        s = reports[name].summary()
        print(f"{name:<12} {s['auc_mean']:>8.4f} {s['auc_std']:>8.4f} "
              f"{s['tpr_at_1pct_fpr_mean']:>10.4f} "
              f"{s['tpr_at_1pct_fpr_std']:>8.4f}")
    print(f"report in {args.out}")
    return 0


_COMMANDS = {
    "simulate": _cmd_simulate,
    "train": _cmd_train,
    "features": _cmd_features,
    "evaluate": _cmd_evaluate,
    "score": _cmd_score,
}


def run_command(argv: Sequence[str]) -> int:
    """Parse and execute one command; returns the process exit code."""
    parser = _build_parser()
    try:
        args = parser.parse_args(list(argv))
        if (getattr(args, "command", None) == "features"
                and args.feature_set == "learned" and not args.model):
            raise _UsageError("--set learned requires --model", parser)
    except _UsageError as exc:
        print(exc.parser.format_usage(), end="", file=sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SystemExit as exc:  # --help and friends
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.command](args)
    except (OSError, ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run_command(sys.argv[1:]))


if __name__ == "__main__":
    main()
