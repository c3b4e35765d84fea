"""ROC analysis and repeated stratified cross-validation.

The ROC sweep walks the distinct score values in descending order and
advances tied scores as one group, which renders ties as diagonal segments;
endpoints (0,0) and (1,1) are always present.  The trapezoidal area under
that curve equals the pairwise ranking probability P(score+ > score-) with
ties counted 1/2 (the Mann-Whitney statistic) — the test suite holds the two
to 1e-12 of each other.

``repeated_stratified_cv`` runs a train-and-score procedure over ``runs``
independent stratified k-fold partitions.  Per-(run, fold) seeds are derived
from the master seed with splitmix64 (see ``_rng``), so folds could execute
in any order — or in parallel — and still reproduce bit-for-bit.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import numpy as np

from ._ioutil import atomic_write_text
from ._rng import derive_seed, make_rng
from .profiles import TcRecord

# The single-number comparison statistic used throughout: sensitivity at a
# 1% false-positive operating point.
FPR_OPERATING_POINT = 0.01

# A pipeline trains on the first argument and returns one score per record
# of the second; the int is the fold's derived seed.
Pipeline = Callable[[Sequence[TcRecord], Sequence[TcRecord], int], np.ndarray]


@dataclass
class RocCurve:
    """Operating points (fpr, tpr), sorted, spanning (0,0) to (1,1)."""

    points: np.ndarray  # shape (m, 2)

    def __post_init__(self) -> None:
        self.points = np.asarray(self.points, dtype=np.float64)
        if self.points.ndim != 2 or self.points.shape[1] != 2:
            raise ValueError("points must be an (m, 2) array")


@dataclass
class CvEntry:
    """Metrics for one evaluated fold."""

    run: int
    fold: int
    auc: float
    tpr_at_1pct_fpr: float
    curve: RocCurve


@dataclass
class CvReport:
    """All (run, fold) entries of one cross-validated pipeline.

    Entries are ordered canonically by (run, fold).  Aggregates use the
    population standard deviation (ddof = 0) and are always recomputed from
    the entries, so the two can never disagree.
    """

    entries: list[CvEntry]

    def summary(self) -> dict[str, float]:
        aucs = np.array([e.auc for e in self.entries])
        tprs = np.array([e.tpr_at_1pct_fpr for e in self.entries])
        return {
            "auc_mean": float(aucs.mean()),
            "auc_std": float(aucs.std()),
            "tpr_at_1pct_fpr_mean": float(tprs.mean()),
            "tpr_at_1pct_fpr_std": float(tprs.std()),
        }


def roc(scores: Sequence[float] | np.ndarray,
        labels: Sequence[int] | np.ndarray) -> RocCurve:
    """ROC curve from scores and {0,1} labels.

    Thresholds sweep the distinct score values in descending order; all
    samples sharing a score enter together (one diagonal step).

    Raises:
        ValueError: non-finite scores or single-class labels.
    """
    s = np.asarray(scores, dtype=np.float64).ravel()
    t = np.asarray(labels).ravel()
    if s.shape != t.shape:
        raise ValueError("scores and labels must have equal length")
    if not np.all(np.isfinite(s)):
        raise ValueError("scores must be finite")
    if not np.all(np.isin(t, (0, 1))):
        raise ValueError("labels must be 0 or 1")
    n_pos = int(np.sum(t == 1))
    n_neg = t.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("roc needs both classes present")

    order = np.argsort(-s, kind="mergesort")
    s_sorted = s[order]
    t_sorted = t[order]
    # Indices where a tie group ends (last member of each distinct value).
    group_end = np.nonzero(np.diff(s_sorted))[0]
    group_end = np.append(group_end, s_sorted.size - 1)
    cum_tp = np.cumsum(t_sorted == 1)
    cum_fp = np.cumsum(t_sorted == 0)
    fpr = np.concatenate(([0.0], cum_fp[group_end] / n_neg))
    tpr = np.concatenate(([0.0], cum_tp[group_end] / n_pos))
    return RocCurve(points=np.column_stack([fpr, tpr]))


def auc(curve: RocCurve) -> float:
    """Trapezoidal area under the curve, in [0, 1]."""
    fpr = curve.points[:, 0]
    tpr = curve.points[:, 1]
    return float(np.sum(np.diff(fpr) * (tpr[:-1] + tpr[1:]) / 2.0))


def tpr_at_fpr(curve: RocCurve, fpr_target: float) -> float:
    """Sensitivity at a fixed false-positive rate.

    Exact fpr matches return the highest tpr at that fpr (the top of a
    vertical run); otherwise the value is linearly interpolated between the
    bracketing vertices.
    """
    if not 0.0 <= fpr_target <= 1.0:
        raise ValueError(f"fpr_target must be in [0, 1], got {fpr_target}")
    fpr = curve.points[:, 0]
    tpr = curve.points[:, 1]
    below = np.nonzero(fpr <= fpr_target)[0]
    i = int(below[-1])  # fpr[0] = 0, so this always exists
    if fpr[i] == fpr_target or i == fpr.size - 1:
        return float(tpr[i])
    frac = (fpr_target - fpr[i]) / (fpr[i + 1] - fpr[i])
    return float(tpr[i] + frac * (tpr[i + 1] - tpr[i]))


def _stratified_folds(
    labels: np.ndarray, k: int, rng: np.random.Generator
) -> list[np.ndarray]:
    """Indices of k folds with per-class counts balanced within one sample."""
    folds: list[list[int]] = [[] for _ in range(k)]
    for cls in (0, 1):
        idx = np.nonzero(labels == cls)[0]
        idx = rng.permutation(idx)
        for j, sample in enumerate(idx):
            folds[j % k].append(int(sample))
    return [np.sort(np.array(f, dtype=np.intp)) for f in folds]


def _record_labels(records: Sequence[TcRecord]) -> np.ndarray:
    labels = np.empty(len(records), dtype=np.intp)
    for i, rec in enumerate(records):
        if rec.label == "normal":
            labels[i] = 0
        elif rec.label == "event":
            labels[i] = 1
        else:
            raise ValueError(
                f"record {i} is unlabeled; cross-validation needs "
                "normal/event labels"
            )
    return labels


def repeated_stratified_cv(
    records: Sequence[TcRecord],
    k: int,
    runs: int,
    pipeline: Pipeline,
    master_seed: int,
) -> CvReport:
    """Evaluate ``pipeline`` over ``runs`` fresh stratified k-fold partitions.

    Per run, samples of each class are split across k folds within one
    sample of proportionality; each fold is scored by a pipeline trained on
    the other k-1 folds only.  Runs and folds are numbered from 1, and fold
    seeds come from splitmix64 over (master_seed, run, fold), so the whole
    report is a pure function of its inputs.

    Raises:
        ValueError: unlabeled records, or fewer than k samples of either
            class.
    """
    if k < 2:
        raise ValueError("k must be at least 2")
    if runs < 1:
        raise ValueError("runs must be at least 1")
    labels = _record_labels(records)
    for cls in (0, 1):
        count = int(np.sum(labels == cls))
        if count < k:
            raise ValueError(
                f"class {cls} has only {count} samples; need at least k={k}"
            )

    entries: list[CvEntry] = []
    for run in range(1, runs + 1):
        split_rng = make_rng(derive_seed(master_seed, run))
        folds = _stratified_folds(labels, k, split_rng)
        for fold in range(1, k + 1):
            test_idx = folds[fold - 1]
            test_mask = np.zeros(len(records), dtype=bool)
            test_mask[test_idx] = True
            train_records = [records[i] for i in np.nonzero(~test_mask)[0]]
            test_records = [records[i] for i in test_idx]
            seed = derive_seed(master_seed, run, fold)

            scores = np.asarray(pipeline(train_records, test_records, seed),
                                dtype=np.float64)
            if scores.shape != (len(test_records),):
                raise ValueError(
                    "pipeline must return one score per test record"
                )
            curve = roc(scores, labels[test_idx])
            entries.append(
                CvEntry(
                    run=run,
                    fold=fold,
                    auc=auc(curve),
                    tpr_at_1pct_fpr=tpr_at_fpr(curve, FPR_OPERATING_POINT),
                    curve=curve,
                )
            )
    return CvReport(entries=entries)


# ---------------------------------------------------------------------------
# Report artifacts


def write_report_csv(reports: Mapping[str, CvReport], path: str) -> None:
    """Per-fold metrics: ``run,fold,feature_set,auc,tpr_at_1pct_fpr``."""
    rows = []
    for name in sorted(reports):
        for e in reports[name].entries:
            rows.append((e.run, e.fold, name, e.auc, e.tpr_at_1pct_fpr))
    rows.sort(key=lambda r: (r[0], r[1], r[2]))
    buf = io.StringIO()
    buf.write("run,fold,feature_set,auc,tpr_at_1pct_fpr\n")
    for run, fold, name, a, tpr in rows:
        buf.write(f"{run},{fold},{name},{a!r},{tpr!r}\n")
    atomic_write_text(path, buf.getvalue())


def write_summary_csv(reports: Mapping[str, CvReport], path: str) -> None:
    """One aggregate row per feature set (means and population stds)."""
    buf = io.StringIO()
    buf.write("feature_set,auc_mean,auc_std,"
              "tpr_at_1pct_fpr_mean,tpr_at_1pct_fpr_std\n")
    for name in sorted(reports):
        s = reports[name].summary()
        buf.write(
            f"{name},{s['auc_mean']!r},{s['auc_std']!r},"
            f"{s['tpr_at_1pct_fpr_mean']!r},{s['tpr_at_1pct_fpr_std']!r}\n"
        )
    atomic_write_text(path, buf.getvalue())


def write_roc_points_csv(reports: Mapping[str, CvReport], path: str) -> None:
    """Every curve vertex: ``feature_set,run,fold,fpr,tpr``."""
    buf = io.StringIO()
    buf.write("feature_set,run,fold,fpr,tpr\n")
    for name in sorted(reports):
        for e in reports[name].entries:
            for fpr, tpr in e.curve.points:
                buf.write(f"{name},{e.run},{e.fold},{fpr!r},{tpr!r}\n")
    atomic_write_text(path, buf.getvalue())


_FAMILY_COLORS = ("tab:blue", "tab:red", "tab:green", "tab:orange")


def write_roc_svg(reports: Mapping[str, CvReport], path: str) -> None:
    """All per-fold ROC curves as one SVG, one color family per feature set."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6.0, 5.0))
    for color, name in zip(_FAMILY_COLORS, sorted(reports)):
        for i, e in enumerate(reports[name].entries):
            ax.plot(
                e.curve.points[:, 0],
                e.curve.points[:, 1],
                color=color,
                alpha=0.35,
                linewidth=1.0,
                label=name if i == 0 else None,
            )
    ax.plot([0, 1], [0, 1], color="gray", linewidth=0.8, linestyle=":")
    ax.set_xlabel("False positive rate")
    ax.set_ylabel("True positive rate")
    ax.set_xlim(-0.02, 1.0)
    ax.set_ylim(0.0, 1.02)
    ax.set_title("ROC comparison across CV folds")
    ax.legend(loc="lower right")
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)
