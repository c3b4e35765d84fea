"""Hand-crafted baseline features for one exhaust snapshot.

Twelve numbers per record, in a fixed order: the raw operating point
(``DWATT``, ``TNH``) plus ten statistics of the mean-normalized profile —
max, mean, standard deviation, median, a signed positive-vs-negative count,
the circular sign-change count, kurtosis, skewness, and the best 3-can
window sum and median.  ``MEN`` (the mean) is always 0 on a mean-normalized
profile; the slot is kept so the layout stays a stable 12-wide vector.

All ring statistics treat the profile as circular: the last can neighbors
the first.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .profiles import TcRecord, mean_normalize

HAND_FEATURE_NAMES = (
    "DWATT", "TNH", "MAX", "MEN", "STD", "MED",
    "DIF", "ZR", "KR", "SK", "M3S", "M3M",
)


def circular_windows(profile: np.ndarray, k: int) -> np.ndarray:
    """All length-``k`` windows of a ring, one centered on each can.

    Window ``j`` holds the entries at indices ``j-(k-1)/2 .. j+(k-1)/2``
    modulo ``n``, so the result has shape ``(n, k)``.

    Raises:
        ValueError: if ``k`` is even or exceeds the profile length.
    """
    p = np.asarray(profile, dtype=np.float64)
    n = p.shape[0]
    if k % 2 == 0:
        raise ValueError(f"window length must be odd, got {k}")
    if not 1 <= k <= n:
        raise ValueError(f"window length {k} outside [1, {n}]")
    half = (k - 1) // 2
    idx = (np.arange(n)[:, None] + np.arange(-half, half + 1)[None, :]) % n
    return p[idx]


def zero_crossings(profile: np.ndarray) -> int:
    """Count circular adjacent pairs with strictly opposite signs.

    A zero entry breaks a run without itself counting as a crossing:
    only pairs whose signed product is negative contribute.
    """
    p = np.asarray(profile, dtype=np.float64)
    s = np.sign(p)
    return int(np.sum(s * np.roll(s, -1) < 0))


def compute_hand_features(record: TcRecord) -> np.ndarray:
    """The 12 baseline features of one record, ordered as HAND_FEATURE_NAMES.

    DWATT and TNH pass through raw.  The remaining ten are computed on the
    mean-normalized profile: MAX/MEN/STD/MED are the max, mean, population
    standard deviation, and median; DIF is (#positive - #negative) entries;
    ZR is the circular sign-change count; KR = m4/m2^2 and SK = m3/m2^1.5
    with population central moments (both defined as 0 on a zero-variance
    profile); M3S and M3M are the best sum and best median over the n
    circular 3-can windows.
    """
    p = mean_normalize(record.tc_temps)

    d = p - p.mean()
    m2 = float(np.mean(d**2))
    if m2 == 0.0:
        kr = sk = 0.0
    else:
        kr = float(np.mean(d**4)) / m2**2
        sk = float(np.mean(d**3)) / m2**1.5

    windows = circular_windows(p, 3)
    return np.array(
        [
            record.dwatt,
            record.tnh,
            float(np.max(p)),
            float(np.mean(p)),
            float(np.std(p)),
            float(np.median(p)),
            float(np.sum(p > 0) - np.sum(p < 0)),
            float(zero_crossings(p)),
            kr,
            sk,
            float(windows.sum(axis=1).max()),
            float(np.median(windows, axis=1).max()),
        ],
        dtype=np.float64,
    )


def hand_feature_matrix(records: Sequence[TcRecord]) -> np.ndarray:
    """Stack per-record features into an ``(n_records, 12)`` matrix."""
    if len(records) == 0:
        return np.empty((0, len(HAND_FEATURE_NAMES)), dtype=np.float64)
    return np.stack([compute_hand_features(r) for r in records])
