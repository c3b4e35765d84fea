"""Exhaust thermocouple records: in-memory types, normalization, filtering, CSV I/O.

A gas turbine's exhaust is instrumented with a ring of thermocouples.  One
:class:`TcRecord` is a snapshot of that ring plus the operating point
(generator load ``dwatt`` in MW, shaft speed ``tnh`` in % of rated) and an
optional health label.  Downstream feature code works on the *mean-normalized
profile* — the temperature vector with its own mean subtracted — which removes
the absolute temperature level and leaves only the pattern around the ring.

Dataset CSV layout (one record per row)::

    timestamp,dwatt,tnh,label,tc_01,tc_02,...,tc_NN

``label`` is one of ``normal``, ``event``, ``unlabeled``.  Floats are written
with full ``repr`` precision so a load/save round trip is byte-identical.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from ._ioutil import atomic_write_text

VALID_LABELS = ("normal", "event", "unlabeled")

# Plausible physical range for exhaust thermocouple readings, degF.  Values
# outside this window are treated as sensor faults and filtered out.
TEMP_MIN = -100.0
TEMP_MAX = 2500.0

_SCALAR_COLUMNS = ("timestamp", "dwatt", "tnh", "label")
_TC_PREFIX = "tc_"


@dataclass(frozen=True, eq=False)
class TcRecord:
    """One snapshot of the thermocouple ring and operating point.

    Attributes:
        timestamp: seconds since the epoch.
        tc_temps: float64 vector of ring temperatures, degF, one per can.
        dwatt: generator load, MW.
        tnh: shaft speed, percent of rated.
        label: one of ``normal``, ``event``, ``unlabeled``.
    """

    timestamp: float
    tc_temps: np.ndarray
    dwatt: float
    tnh: float
    label: str = "unlabeled"

    def __post_init__(self) -> None:
        if self.label not in VALID_LABELS:
            raise ValueError(
                f"unknown label {self.label!r}; expected one of {VALID_LABELS}"
            )
        object.__setattr__(
            self, "tc_temps", np.asarray(self.tc_temps, dtype=np.float64)
        )
        if self.tc_temps.ndim != 1:
            raise ValueError("tc_temps must be a 1-D vector")


@dataclass
class Dataset:
    """A list of records that all share the same ring size ``n_tc``."""

    records: list[TcRecord]
    n_tc: int
    provenance: str = ""

    def __post_init__(self) -> None:
        for i, rec in enumerate(self.records):
            if rec.tc_temps.shape[0] != self.n_tc:
                raise ValueError(
                    f"record {i} has {rec.tc_temps.shape[0]} thermocouples, "
                    f"expected {self.n_tc}"
                )


def mean_normalize(temps: Sequence[float] | np.ndarray) -> np.ndarray:
    """Subtract the ring mean from a temperature vector.

    The result sums to ~0 and is invariant to adding a constant to every
    reading, so it isolates the spatial pattern from the absolute level.

    Raises:
        ValueError: on an empty vector ("empty profile") or any non-finite
            reading ("invalid reading").
    """
    x = np.asarray(temps, dtype=np.float64)
    if x.ndim != 1 or x.size == 0:
        raise ValueError("empty profile")
    if not np.all(np.isfinite(x)):
        raise ValueError("invalid reading: profile contains non-finite values")
    return x - x.mean()


def record_is_valid(record: TcRecord) -> bool:
    """True when every numeric field is finite and temps are physically plausible."""
    if not (np.isfinite(record.timestamp) and np.isfinite(record.dwatt)
            and np.isfinite(record.tnh)):
        return False
    t = record.tc_temps
    if t.size == 0 or not np.all(np.isfinite(t)):
        return False
    return bool(np.all(t >= TEMP_MIN) and np.all(t <= TEMP_MAX))


def filter_records(
    records: Sequence[TcRecord], tnh_min: float = 95.0
) -> list[TcRecord]:
    """Drop part-load and physically invalid records, preserving order.

    Keeps records with ``tnh >= tnh_min`` (full-speed operation, where the
    exhaust pattern is comparable across snapshots) whose numeric fields are
    all finite and whose temperatures lie in [TEMP_MIN, TEMP_MAX].

    Args:
        records: input records, any labels.
        tnh_min: part-load cutoff in percent speed; must lie in (0, 200].

    Returns:
        The retained records in their original order.  Applying the filter
        twice returns the same list (idempotent).
    """
    if not 0.0 < tnh_min <= 200.0:
        raise ValueError(f"tnh_min must be in (0, 200], got {tnh_min}")
    return [r for r in records if record_is_valid(r) and r.tnh >= tnh_min]


def _tc_columns(n_tc: int) -> list[str]:
    pad = max(2, len(str(n_tc)))
    return [f"{_TC_PREFIX}{i + 1:0{pad}d}" for i in range(n_tc)]


def _fmt(value: float) -> str:
    # repr of a Python float is the shortest string that round-trips exactly.
    return repr(float(value))


def save_csv(dataset: Dataset, path: str) -> None:
    """Write a dataset in the standard CSV layout (atomically)."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(list(_SCALAR_COLUMNS) + _tc_columns(dataset.n_tc))
    for rec in dataset.records:
        writer.writerow(
            [_fmt(rec.timestamp), _fmt(rec.dwatt), _fmt(rec.tnh), rec.label]
            + [_fmt(v) for v in rec.tc_temps]
        )
    atomic_write_text(path, buf.getvalue())


def load_csv(path: str, schema: Mapping[str, str] | None = None) -> Dataset:
    """Read a dataset CSV into memory.

    Args:
        path: CSV file with the standard header.
        schema: optional column-name overrides for the scalar fields, e.g.
            ``{"dwatt": "load_mw"}``; thermocouple columns are recognized by
            the ``tc_`` prefix regardless.

    Returns:
        Dataset with one TcRecord per data row, in file order;
        ``provenance`` is set to ``path``.

    Raises:
        ValueError: missing column ("missing column: tnh"), a row with the
            wrong field count, an unparsable cell, or an unknown label —
            all reported with their line number.
    """
    names = {c: c for c in _SCALAR_COLUMNS}
    if schema:
        names.update(schema)
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty file, no header") from None
        col_index = {name: i for i, name in enumerate(header)}
        for logical in _SCALAR_COLUMNS:
            if names[logical] not in col_index:
                raise ValueError(f"missing column: {names[logical]}")
        tc_idx = [i for i, name in enumerate(header)
                  if name.startswith(_TC_PREFIX)]
        if not tc_idx:
            raise ValueError(f"missing column: {_TC_PREFIX}01")

        records: list[TcRecord] = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue  # tolerate a trailing blank line
            if len(row) != len(header):
                raise ValueError(
                    f"line {lineno}: expected {len(header)} fields, got {len(row)}"
                )

            def cell(column: str) -> float:
                raw = row[col_index[column]]
                try:
                    return float(raw)
                except ValueError:
                    raise ValueError(
                        f"line {lineno}: column {column!r}: "
                        f"cannot parse {raw!r} as a number"
                    ) from None

            label = row[col_index[names["label"]]]
            if label not in VALID_LABELS:
                raise ValueError(
                    f"line {lineno}: unknown label {label!r}; "
                    f"expected one of {VALID_LABELS}"
                )
            temps = np.empty(len(tc_idx), dtype=np.float64)
            for j, i in enumerate(tc_idx):
                try:
                    temps[j] = float(row[i])
                except ValueError:
                    raise ValueError(
                        f"line {lineno}: column {header[i]!r}: "
                        f"cannot parse {row[i]!r} as a number"
                    ) from None
            records.append(
                TcRecord(
                    timestamp=cell(names["timestamp"]),
                    tc_temps=temps,
                    dwatt=cell(names["dwatt"]),
                    tnh=cell(names["tnh"]),
                    label=label,
                )
            )
    return Dataset(records=records, n_tc=len(tc_idx), provenance=str(path))
