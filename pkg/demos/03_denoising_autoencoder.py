"""Training a single denoising autoencoder on exhaust profiles.

A denoising autoencoder is forced to reconstruct a clean snapshot from a
deliberately corrupted copy, so it cannot get away with memorizing inputs --
it has to capture the structure that survives corruption.  This script trains
one on simulated healthy profiles, shows the loss falling, and reconstructs a
profile from a half-masked version of itself.

Run:  python demos/03_denoising_autoencoder.py
"""

import os

import numpy as np

from exhaust_sentinel import (
    Corruption,
    DaeConfig,
    SimConfig,
    corrupt,
    decode,
    encode,
    gen_dataset,
    make_rng,
    preprocess,
    train_dae,
)

OUT_DIR = os.path.join(os.path.dirname(__file__), "output")
os.makedirs(OUT_DIR, exist_ok=True)


def main():
    dataset = gen_dataset(SimConfig(n_normal=600, n_fault=0, seed=3))
    _, x, _ = preprocess(dataset.records)
    print(f"training matrix: {x.shape[0]} profiles x {x.shape[1]} "
          f"thermocouples, rescaled into [0, 1]\n")

    cfg = DaeConfig(
        d_in=27,
        d_hidden=30,
        corruption=Corruption(kind="masking", rate=0.1),
        epochs=120,
        seed=5,
    )
    print("architecture: 27 -> 30 -> 27, masking corruption "
          f"(rate {cfg.corruption.rate}), squared loss, linear decoder")
    result = train_dae(x, cfg)
    losses = result.epoch_losses
    print("mean clean-reconstruction loss by epoch:")
    for epoch in (1, 2, 5, 10, 30, 60, 120):
        print(f"  epoch {epoch:>3}: {losses[epoch - 1]:.5f}")
    print(f"  ({losses[-1] / losses[0]:.1%} of the epoch-1 loss remains)\n")

    # Denoising in action: blank out half the ring, ask for it back.
    rng = make_rng(99)
    probe = x[0]
    damaged = corrupt(probe, Corruption(kind="masking", rate=0.5), rng)
    restored = decode(encode(damaged, result.params), result.params)
    err_damaged = float(np.mean((damaged - probe) ** 2))
    err_restored = float(np.mean((restored - probe) ** 2))
    print("reconstruction from a 50%-masked profile:")
    print(f"  mean squared gap, damaged vs original:  {err_damaged:.4f}")
    print(f"  mean squared gap, restored vs original: {err_restored:.4f}")
    print("  the autoencoder fills the blanked thermocouples back in from "
          "ring context\n")

    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))
    ax1.plot(np.arange(1, len(losses) + 1), losses)
    ax1.set_xlabel("epoch")
    ax1.set_ylabel("mean clean loss")
    ax1.set_title("Training curve")
    ax2.plot(probe, "o-", label="original")
    ax2.plot(damaged, "x--", label="50% masked")
    ax2.plot(restored, "s-", label="restored")
    ax2.set_xlabel("thermocouple index")
    ax2.set_ylabel("rescaled temperature")
    ax2.set_title("Denoising one profile")
    ax2.legend()
    fig.tight_layout()
    path = os.path.join(OUT_DIR, "dae_training.svg")
    fig.savefig(path)
    print(f"wrote {path}")


if __name__ == "__main__":
    main()
