"""Learned features vs hand-crafted features, head to head.

This is the whole experiment in one script: simulate a labeled fleet history,
fit the unsupervised feature stack once on healthy data, then let repeated
stratified cross-validation referee between two classifiers that differ only
in their inputs -- 12 learned features against 12 engineered ones.

Uses two CV repetitions instead of the full ten so it finishes in about a
minute; the `exhaust-sentinel evaluate` command runs the full protocol.

Run:  python demos/06_roc_comparison.py
"""

import os
import time

from exhaust_sentinel import (
    PipelineConfig,
    SimConfig,
    filter_records,
    gen_dataset,
    repeated_stratified_cv,
)
from exhaust_sentinel.evaluation import (
    write_report_csv,
    write_roc_points_csv,
    write_roc_svg,
    write_summary_csv,
)
from exhaust_sentinel.pipeline import (
    fit_unsupervised,
    make_hand_pipeline,
    make_learned_pipeline,
)

OUT_DIR = os.path.join(os.path.dirname(__file__), "output")
os.makedirs(OUT_DIR, exist_ok=True)


def main():
    config = PipelineConfig(runs=2)
    dataset = gen_dataset(SimConfig(seed=0))
    records = filter_records(dataset.records, config.tnh_min)
    n_events = sum(r.label == "event" for r in records)
    print(f"dataset: {len(records)} records after the speed filter, "
          f"{n_events} events")
    print(f"protocol: {config.runs} repetitions of stratified "
          f"{config.folds}-fold cross-validation\n")

    t0 = time.time()
    print("fitting rescale stats + stacked autoencoder once on the healthy "
          "pool ...")
    unsupervised = fit_unsupervised(records, config, config.seed)
    print(f"  done in {time.time() - t0:.1f}s\n")

    pipelines = {
        "hand": make_hand_pipeline(config),
        "learned": make_learned_pipeline(config, unsupervised),
    }
    reports = {}
    for name, pipeline in pipelines.items():
        t0 = time.time()
        print(f"cross-validating the {name} pipeline "
              f"({config.runs * config.folds} fold evaluations) ...")
        reports[name] = repeated_stratified_cv(
            records, config.folds, config.runs, pipeline, config.seed
        )
        print(f"  done in {time.time() - t0:.1f}s")
    print()

    header = f"{'feature set':>12} {'AUC':>16} {'TPR at 1% FPR':>18}"
    print(header)
    print("-" * len(header))
    for name, report in reports.items():
        s = report.summary()
        print(f"{name:>12} {s['auc_mean']:8.3f} ± {s['auc_std']:5.3f}"
              f" {s['tpr_at_1pct_fpr_mean']:9.3f} ± "
              f"{s['tpr_at_1pct_fpr_std']:5.3f}")
    print()
    gap = (reports["learned"].summary()["auc_mean"]
           - reports["hand"].summary()["auc_mean"])
    print(f"The learned features win by {gap:+.3f} AUC here.  The engineered "
          "set summarizes")
    print("the profile shape in fixed ways; the autoencoder stack tunes its "
          "summary to")
    print("exactly the swirl-pattern structure this fleet produces.")

    for writer, fname in (
        (write_report_csv, "report.csv"),
        (write_summary_csv, "summary.csv"),
        (write_roc_points_csv, "roc_points.csv"),
        (write_roc_svg, "roc_comparison.svg"),
    ):
        path = os.path.join(OUT_DIR, fname)
        writer(reports, path)
        print(f"wrote {path}")


if __name__ == "__main__":
    main()
