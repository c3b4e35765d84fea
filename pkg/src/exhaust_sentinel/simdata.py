"""Synthetic exhaust-temperature data with controllable combustor faults.

A healthy ring reads a base temperature plus a "swirl" sine pattern (the
hot-gas path twists between the combustor cans and the exhaust plane) plus
white sensor noise.  At full-speed operation the swirl angle does not spin
freely — it wobbles mildly around a fixed anchor with load, so the phase is
drawn per record from a narrow interval.  A combustion fault shows up as a
cold (or hot) bump centered on one can and spilling into its circular
neighbors with a Gaussian falloff.

The generators are deterministic given a seed: the same :class:`SimConfig`
always produces the same dataset, byte for byte once written to CSV.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from ._rng import make_rng
from .profiles import Dataset, TcRecord

# Operating-point envelope for generated records.  TNH is drawn at or above
# the default part-load cutoff (95%) so simulated data survives filtering.
_TNH_RANGE = (95.0, 101.0)
_DWATT_NOMINAL = 150.0
_DWATT_JITTER = 5.0
# Half-width (radians) of the per-record swirl-phase wobble at full speed.
_SWIRL_PHASE_JITTER = 0.3
_T_START = 1_600_000_000.0  # first timestamp, seconds since the epoch
_T_STEP = 60.0              # one record per minute


@dataclass(frozen=True)
class SimConfig:
    """Simulator knobs.

    Attributes:
        n_cans: thermocouples around the ring.
        base_temp: healthy mean exhaust temperature, degF.
        swirl_amp: amplitude of the rotating sine pattern, degF.
        sensor_noise_std: white-noise sigma per thermocouple, degF.
        n_normal: healthy records to generate.
        n_fault: faulted records to generate.
        seed: master seed for the whole dataset.
    """

    n_cans: int = 27
    base_temp: float = 1000.0
    swirl_amp: float = 8.0
    sensor_noise_std: float = 3.0
    n_normal: int = 5000
    n_fault: int = 100
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n_cans < 3:
            raise ValueError("n_cans must be at least 3")
        if self.sensor_noise_std < 0 or self.swirl_amp < 0:
            raise ValueError("noise and swirl amplitudes must be >= 0")
        if self.n_normal < 0 or self.n_fault < 0:
            raise ValueError("record counts must be >= 0")


@dataclass(frozen=True)
class FaultSpec:
    """One localized combustion fault.

    Attributes:
        center_can: index of the worst can, 0-based.
        depth_degf: peak temperature deviation at the center, degF (>= 0).
        width_cans: Gaussian falloff scale in can units (> 0).
        kind: "cold" (deviation subtracted) or "hot" (added).
    """

    center_can: int
    depth_degf: float
    width_cans: float
    kind: str = "cold"

    def __post_init__(self) -> None:
        if self.depth_degf < 0:
            raise ValueError("depth_degf must be >= 0")
        if self.width_cans <= 0:
            raise ValueError("width_cans must be > 0")
        if self.kind not in ("cold", "hot"):
            raise ValueError(f"kind must be 'cold' or 'hot', got {self.kind!r}")


@dataclass(frozen=True)
class FaultDistribution:
    """Sampling ranges for random :class:`FaultSpec` draws (uniform per field)."""

    kind: str = "cold"
    depth_range: tuple[float, float] = (20.0, 30.0)
    width_range: tuple[float, float] = (2.0, 4.0)

    def __post_init__(self) -> None:
        dl, dh = self.depth_range
        wl, wh = self.width_range
        if not (0 <= dl <= dh):
            raise ValueError("depth_range must satisfy 0 <= lo <= hi")
        if not (0 < wl <= wh):
            raise ValueError("width_range must satisfy 0 < lo <= hi")
        if self.kind not in ("cold", "hot"):
            raise ValueError(f"kind must be 'cold' or 'hot', got {self.kind!r}")

    def sample(self, rng: np.random.Generator, n_cans: int) -> FaultSpec:
        """Draw one fault: uniform center can, depth, and width."""
        return FaultSpec(
            center_can=int(rng.integers(0, n_cans)),
            depth_degf=float(rng.uniform(*self.depth_range)),
            width_cans=float(rng.uniform(*self.width_range)),
            kind=self.kind,
        )


DEFAULT_FAULTS = FaultDistribution()


def gen_normal(cfg: SimConfig, rng: np.random.Generator) -> TcRecord:
    """One healthy snapshot.

    Per record the generator draws, in this order: the swirl phase (uniform
    within +/- _SWIRL_PHASE_JITTER of the anchor), the per-can noise vector,
    TNH, and DWATT.  The fixed draw order is part of the determinism
    contract.
    """
    phase = rng.uniform(-_SWIRL_PHASE_JITTER, _SWIRL_PHASE_JITTER)
    noise = rng.normal(0.0, cfg.sensor_noise_std, size=cfg.n_cans)
    angles = 2.0 * math.pi * np.arange(cfg.n_cans) / cfg.n_cans
    temps = cfg.base_temp + cfg.swirl_amp * np.sin(angles + phase) + noise
    tnh = float(rng.uniform(*_TNH_RANGE))
    dwatt = float(
        rng.uniform(_DWATT_NOMINAL - _DWATT_JITTER, _DWATT_NOMINAL + _DWATT_JITTER)
    )
    return TcRecord(
        timestamp=0.0, tc_temps=temps, dwatt=dwatt, tnh=tnh, label="normal"
    )


def inject_fault(record: TcRecord, fault: FaultSpec) -> TcRecord:
    """Overlay a fault bump on a copy of ``record`` and relabel it ``event``.

    The bump at can ``i`` is ``depth * exp(-d(i, c)^2 / (2 w^2))`` where
    ``d`` is the circular can distance ``min(|i - c|, n - |i - c|)``; it is
    subtracted for a cold fault and added for a hot one.  The input record
    is not modified.

    Raises:
        ValueError: if ``center_can`` is outside the record's ring.
    """
    n = record.tc_temps.shape[0]
    if not 0 <= fault.center_can < n:
        raise ValueError(
            f"center_can {fault.center_can} outside ring of {n} cans"
        )
    i = np.arange(n)
    straight = np.abs(i - fault.center_can)
    dist = np.minimum(straight, n - straight)
    bump = fault.depth_degf * np.exp(-(dist**2) / (2.0 * fault.width_cans**2))
    sign = -1.0 if fault.kind == "cold" else 1.0
    return replace(record, tc_temps=record.tc_temps + sign * bump, label="event")


def gen_dataset(
    cfg: SimConfig, faults: FaultDistribution | None = None
) -> Dataset:
    """A full labeled dataset: ``n_normal`` healthy + ``n_fault`` faulted records.

    Faulted records are spread uniformly at random over the timeline (fault
    positions are drawn without replacement), timestamps increase by a fixed
    step, and the whole dataset is a pure function of ``cfg.seed``.

    Args:
        cfg: simulator configuration (counts, ring geometry, noise, seed).
        faults: distribution faults are drawn from; defaults to
            :data:`DEFAULT_FAULTS`.
    """
    if faults is None:
        faults = DEFAULT_FAULTS
    rng = make_rng(cfg.seed)
    n_total = cfg.n_normal + cfg.n_fault

    records = [gen_normal(cfg, rng) for _ in range(n_total)]
    fault_slots = rng.choice(n_total, size=cfg.n_fault, replace=False)
    for slot in sorted(int(s) for s in fault_slots):
        records[slot] = inject_fault(records[slot], faults.sample(rng, cfg.n_cans))
    records = [
        replace(rec, timestamp=_T_START + _T_STEP * i)
        for i, rec in enumerate(records)
    ]
    return Dataset(
        records=records,
        n_tc=cfg.n_cans,
        provenance=f"simulated(seed={cfg.seed})",
    )
