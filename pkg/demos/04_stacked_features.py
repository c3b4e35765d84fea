"""From a single autoencoder to a stacked feature extractor.

Stacking means training a second autoencoder on the hidden codes of the
first, then keeping only the two encoders: 27 sensors in, 12 learned features
out.  This script trains the stack greedily on healthy profiles and then
looks at what the 12 features do when a fault appears.

Run:  python demos/04_stacked_features.py
"""

import os

import numpy as np

from exhaust_sentinel import (
    Corruption,
    DaeConfig,
    SimConfig,
    extract,
    gen_dataset,
    preprocess,
    train_sdae,
)
from exhaust_sentinel.sdae import default_layer_configs

OUT_DIR = os.path.join(os.path.dirname(__file__), "output")
os.makedirs(OUT_DIR, exist_ok=True)


def main():
    # Fit the stack on healthy data only; faults stay unseen until later.
    train_set = gen_dataset(SimConfig(n_normal=600, n_fault=0, seed=3))
    _, x_train, stats = preprocess(train_set.records)

    template = DaeConfig(
        d_in=27,
        d_hidden=30,
        corruption=Corruption(kind="masking", rate=0.1),
        epochs=120,
        seed=5,
    )
    configs = default_layer_configs(27, widths=(30, 12), template=template)
    print("greedy layer-wise training: 27 -> 30, then 30 -> 12")
    loss_log: list[np.ndarray] = []
    model = train_sdae(x_train, configs, loss_log=loss_log)
    for i, trace in enumerate(loss_log, start=1):
        print(f"  layer {i}: loss {trace[0]:.5f} (epoch 1) -> "
              f"{trace[-1]:.5f} (epoch {len(trace)})")
    widths = " -> ".join(str(w) for w in model.widths)
    print(f"  kept encoders only: {widths}\n")

    # Push a mixed dataset through the frozen stack.
    mixed = gen_dataset(SimConfig(n_normal=300, n_fault=60, seed=21))
    kept, x_mixed, _ = preprocess(mixed.records, fitted_stats=stats)
    labels = np.array([1 if r.label == "event" else 0 for r in kept])
    feats = extract(x_mixed, model)
    print(f"learned features for {feats.shape[0]} records: "
          f"shape {feats.shape}, all in (0, 1)")

    normal_mean = feats[labels == 0].mean(axis=0)
    event_mean = feats[labels == 1].mean(axis=0)
    pooled_std = feats[labels == 0].std(axis=0) + 1e-12
    shift = (event_mean - normal_mean) / pooled_std
    print("\nper-feature shift when a fault is present "
          "(event mean - normal mean, in normal-population sigmas):")
    for j, z in enumerate(shift, start=1):
        bar = "#" * min(40, int(round(abs(z) * 4)))
        print(f"  f_{j:02d}  {z:+6.2f}  {bar}")
    print("\nSeveral learned features shift by a sigma or more when a fault "
          "is present,")
    print("even though the stack never saw a single faulted profile during "
          "training.")
    print("No one feature is decisive -- the classifier in the next demo "
          "combines")
    print("all twelve.")

    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    # Scatter the two most fault-sensitive features against each other.
    top = np.argsort(-np.abs(shift))[:2]
    fig, ax = plt.subplots(figsize=(6, 5))
    ax.scatter(feats[labels == 0, top[0]], feats[labels == 0, top[1]],
               s=12, alpha=0.5, label="normal")
    ax.scatter(feats[labels == 1, top[0]], feats[labels == 1, top[1]],
               s=16, alpha=0.8, marker="s", label="event")
    ax.set_xlabel(f"learned feature f_{top[0] + 1:02d}")
    ax.set_ylabel(f"learned feature f_{top[1] + 1:02d}")
    ax.set_title("Two learned features, colored by health label")
    ax.legend()
    fig.tight_layout()
    path = os.path.join(OUT_DIR, "stacked_features.svg")
    fig.savefig(path)
    print(f"\nwrote {path}")


if __name__ == "__main__":
    main()
