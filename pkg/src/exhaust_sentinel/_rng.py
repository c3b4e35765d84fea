"""Deterministic random-number plumbing shared by every module.

All stochastic code in this package draws from a ``numpy.random.Generator``
backed by the Philox 4x64 counter-based bit generator, so independent
streams can be derived cheaply and runs replay bit-for-bit from a single
integer seed.  Child seeds (per run, per fold, per stage) are derived with
splitmix64, a well-known 64-bit finalizer-style mixing function.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1


def splitmix64(state: int) -> int:
    """One splitmix64 step: mix ``state`` into a well-distributed 64-bit value."""
    z = (state + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


def derive_seed(master_seed: int, *indices: int) -> int:
    """Derive a child seed from ``master_seed`` and an index path.

    Chains splitmix64 over the master seed and each index in turn, so
    ``derive_seed(s, 3, 1)`` and ``derive_seed(s, 1, 3)`` differ and every
    (run, fold, stage, ...) tuple gets its own decorrelated stream.

    The chained state is re-mixed before each index is folded in; combining
    the two symmetrically (e.g. XOR of two hashes) would make single-index
    paths commute — ``derive_seed(a, b) == derive_seed(b, a)`` — and alias
    streams across master seeds.
    """
    state = splitmix64(master_seed & _MASK64)
    for ix in indices:
        state = splitmix64(splitmix64(state) ^ (ix & _MASK64))
    return state


def make_rng(seed: int) -> np.random.Generator:
    """A fresh Philox-backed Generator keyed by ``seed``."""
    return np.random.Generator(np.random.Philox(key=seed & _MASK64))
