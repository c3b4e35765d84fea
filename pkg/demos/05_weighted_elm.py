"""Why the classifier weights its training examples.

Fault records are rare -- a dozen events against hundreds of healthy
snapshots.  A least-squares classifier fit on raw counts is dominated by the
majority class: it can still *rank* events above normals reasonably well, but
it parks their scores deep inside the "normal" half of the [0,1] range, so
any fixed alarm threshold misses them.  The extreme learning machine here
solves a *weighted* ridge problem instead, giving each class half the total
pull.  This script fits both variants on the same imbalanced data and shows
what moves (score placement) and what doesn't (ranking).

Run:  python demos/05_weighted_elm.py
"""

import os

import numpy as np

from exhaust_sentinel import (
    SimConfig,
    auc,
    class_weights,
    fit_elm,
    gen_dataset,
    hand_feature_matrix,
    init_elm,
    make_rng,
    roc,
    score,
)
from exhaust_sentinel.pipeline import RescaleStats

OUT_DIR = os.path.join(os.path.dirname(__file__), "output")
os.makedirs(OUT_DIR, exist_ok=True)


def prepare(seed, n_fault):
    dataset = gen_dataset(SimConfig(n_normal=600, n_fault=n_fault, seed=seed))
    records = dataset.records
    targets = np.array([1.0 if r.label == "event" else 0.0 for r in records])
    return hand_feature_matrix(records), targets


def main():
    # Train on a realistically imbalanced set; evaluate on a fresh draw with
    # extra events so the held-out percentages are stable enough to read.
    x_train, t_train = prepare(seed=31, n_fault=12)
    x_test, t_test = prepare(seed=32, n_fault=60)

    # Rescale features into the unit box, stats fitted on training data only.
    stats = RescaleStats.fit(x_train)
    x_train = stats.transform(x_train)
    x_test = stats.transform(x_test)

    n_events = int(t_train.sum())
    print(f"training set: {len(t_train)} records, only {n_events} events "
          f"({n_events / len(t_train):.1%})\n")

    w = class_weights(t_train)
    print("per-example weights that give each class half the total pull:")
    print(f"  normal example: {w[t_train == 0][0]:8.3f}")
    print(f"  event example:  {w[t_train == 1][0]:8.3f}\n")

    # Two models drawn from the same seed share the identical random hidden
    # layer, so the only difference between them is the example weighting.
    # Moderate capacity keeps the fit from interpolating the training set,
    # which is the regime where imbalance actually bites.
    unweighted = fit_elm(
        init_elm(12, n_hidden=40, rng=make_rng(8), ridge=0.5),
        x_train, t_train)
    weighted = fit_elm(
        init_elm(12, n_hidden=40, rng=make_rng(8), ridge=0.5),
        x_train, t_train, weights=w)

    print(f"{'':>26}{'unweighted':>12}{'weighted':>12}")
    for name, x_eval, t_eval in (("train", x_train, t_train),
                                 ("held out", x_test, t_test)):
        s_u = score(x_eval, unweighted)
        s_w = score(x_eval, weighted)
        rows = {
            "event-score median": (np.median(s_u[t_eval == 1]),
                                   np.median(s_w[t_eval == 1])),
            "events above 0.5": (np.mean(s_u[t_eval == 1] > 0.5),
                                 np.mean(s_w[t_eval == 1] > 0.5)),
            "normals above 0.5": (np.mean(s_u[t_eval == 0] > 0.5),
                                  np.mean(s_w[t_eval == 0] > 0.5)),
            "AUC (ranking)": (auc(roc(s_u, t_eval)), auc(roc(s_w, t_eval))),
        }
        print(f"  --- {name} ---")
        for label, (a, b) in rows.items():
            print(f"  {label:>24}{a:12.3f}{b:12.3f}")
    print()
    print("Held-out ranking quality (AUC) barely moves -- weighting adds no "
          "new")
    print("information.  What changes is where the events land: without")
    print("weights most held-out events score below the natural 0.5 "
          "threshold and would")
    print("never raise an alarm; with weights the majority of them cross it, "
          "at the cost")
    print("of a small false-alarm rate.  That score placement is what makes "
          "a deployable")
    print("threshold possible, so the full pipeline fits its classifier "
          "weighted.")

    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    s_u = score(x_test, unweighted)
    s_w = score(x_test, weighted)
    fig, axes = plt.subplots(1, 2, figsize=(10, 4), sharey=True)
    for ax, s, title in ((axes[0], s_u, "unweighted"),
                         (axes[1], s_w, "class-weighted")):
        ax.hist(s[t_test == 0], bins=30, alpha=0.6, label="normal")
        ax.hist(s[t_test == 1], bins=30, alpha=0.8, label="event")
        ax.axvline(0.5, color="k", linestyle=":", linewidth=1)
        ax.set_title(title)
        ax.set_xlabel("classifier score")
        ax.legend()
    axes[0].set_ylabel("held-out records")
    fig.tight_layout()
    path = os.path.join(OUT_DIR, "weighted_elm.svg")
    fig.savefig(path)
    print(f"\nwrote {path}")


if __name__ == "__main__":
    main()
