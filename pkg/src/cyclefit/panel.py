"""Sector-by-year observation panels: CSV ingestion, normalization, aggregation."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .errors import (
    DuplicateSector,
    EmptyGrouping,
    EmptyPanel,
    GapInYears,
    LengthMismatch,
    MissingColumn,
    NonNumericCell,
    UnknownSector,
    ZeroBaseValue,
)

KINDS = ("output", "consumption")
MIN_FIT_LENGTH = 4


@dataclass(frozen=True)
class TimeGrid:
    """Consecutive integer time grid; ``t = 1..N`` maps to ``t0_label + t - 1``."""

    t0_label: int
    N: int

    def __post_init__(self):
        if self.N < 1:
            raise LengthMismatch(f"time grid needs at least one sample, got N={self.N}")

    @property
    def t(self) -> np.ndarray:
        return np.arange(1, self.N + 1, dtype=float)

    @property
    def years(self) -> np.ndarray:
        return np.arange(self.t0_label, self.t0_label + self.N)

    def year_of(self, t):
        """Calendar label of (possibly fractional) internal time ``t``."""
        return self.t0_label + np.asarray(t) - 1

    def index_of(self, year):
        return np.asarray(year) - self.t0_label + 1

    def sub(self, start: int, length: int) -> "TimeGrid":
        """Grid of ``length`` samples starting at 0-based offset ``start``."""
        if start < 0 or start + length > self.N:
            raise LengthMismatch(f"window [{start}, {start + length}) outside grid of {self.N}")
        return TimeGrid(self.t0_label + start, length)


@dataclass(frozen=True)
class SectorSeries:
    name: str
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim != 1:
            raise LengthMismatch(f"series {self.name!r} must be one-dimensional")
        if not np.all(np.isfinite(v)):
            raise LengthMismatch(f"series {self.name!r} contains non-finite values")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __len__(self):
        return len(self.values)

    def window(self, start: int, length: int) -> "SectorSeries":
        return SectorSeries(self.name, self.values[start:start + length])


@dataclass(frozen=True)
class Panel:
    """Rectangular sectors-by-time matrix with per-series normalization divisors."""

    grid: TimeGrid
    series: tuple
    kind: str = "output"
    scale: tuple = field(default=())

    def __post_init__(self):
        series = tuple(self.series)
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")
        seen = set()
        for s in series:
            if len(s) != self.grid.N:
                raise LengthMismatch(
                    f"series {s.name!r} has {len(s)} values, grid has {self.grid.N}")
            if s.name in seen:
                raise DuplicateSector(s.name)
            seen.add(s.name)
        scale = tuple(float(x) for x in self.scale) if self.scale else (1.0,) * len(series)
        if len(scale) != len(series):
            raise LengthMismatch("one scale entry per series is required")
        if any(not (x > 0 and math.isfinite(x)) for x in scale):
            raise ValueError("scale divisors must be positive and finite")
        object.__setattr__(self, "series", series)
        object.__setattr__(self, "scale", scale)

    @property
    def names(self) -> list:
        return [s.name for s in self.series]

    @property
    def n(self) -> int:
        return len(self.series)

    def matrix(self) -> np.ndarray:
        """Values as an ``(N, n)`` array, one column per sector."""
        if not self.series:
            return np.empty((self.grid.N, 0))
        return np.column_stack([s.values for s in self.series])

    def __getitem__(self, name: str) -> SectorSeries:
        for s in self.series:
            if s.name == name:
                return s
        raise UnknownSector(name)

    def window(self, start: int, length: int) -> "Panel":
        return Panel(self.grid.sub(start, length),
                     tuple(s.window(start, length) for s in self.series),
                     self.kind, self.scale)

    @classmethod
    def from_matrix(cls, names: Sequence[str], values, t0_label: int = 1,
                    kind: str = "output") -> "Panel":
        values = np.asarray(values, dtype=float)
        if values.ndim == 1:
            values = values[:, None]
        grid = TimeGrid(t0_label, values.shape[0])
        return cls(grid, tuple(SectorSeries(nm, values[:, j]) for j, nm in enumerate(names)), kind)


def _parse_float(text, row, col, path):
    try:
        value = float(text)
    except ValueError:
        raise NonNumericCell(row, col, text, path) from None
    if not math.isfinite(value):
        raise NonNumericCell(row, col, text, path)
    return value


def load_panel(path, kind: str = "output") -> Panel:
    """Read a ``year,<sector>,...`` CSV into a :class:`Panel`.

    Row numbers in error messages are 1-based file lines (the header is line 1).
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise MissingColumn("year", path) from None
        if not header or header[0] != "year":
            raise MissingColumn("year", path)
        names = header[1:]
        if not names:
            raise EmptyPanel()
        seen = set()
        for nm in names:
            if not nm:
                raise MissingColumn("<unnamed sector>", path)
            if nm in seen:
                raise DuplicateSector(nm, path)
            seen.add(nm)

        years, rows = [], []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                missing = header[len(row)] if len(row) < len(header) else "<extra>"
                raise MissingColumn(missing, f"{path}: row {lineno}")
            year_text = row[0].strip()
            try:
                year = int(year_text)
            except ValueError:
                raise NonNumericCell(lineno, "year", year_text, path) from None
            if years and year != years[-1] + 1:
                raise GapInYears(years[-1], year, path)
            years.append(year)
            rows.append([_parse_float(c.strip(), lineno, header[j + 1], path)
                         for j, c in enumerate(row[1:])])
    if not years:
        raise LengthMismatch(f"{path}: no data rows")
    data = np.array(rows, dtype=float)
    return Panel.from_matrix(names, data, t0_label=years[0], kind=kind)


def write_panel(panel: Panel, path) -> None:
    """Write ``panel`` in the same CSV layout :func:`load_panel` reads.

    Values use ``repr`` so doubles survive the round trip bit-for-bit.
    """
    path = Path(path)
    m = panel.matrix()
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["year", *panel.names])
        for i, year in enumerate(panel.grid.years):
            w.writerow([int(year), *(repr(float(v)) for v in m[i])])


def normalize(panel: Panel, divisors: Sequence[float] | None = None) -> Panel:
    """Divide every series by its own value at ``t = 1``.

    ``divisors`` overrides the per-series base values; the CLI uses this to put
    a consumption panel in the units of the matching output panel. The recorded
    ``scale`` accumulates, so normalizing twice keeps the raw-unit divisor.
    """
    if divisors is None:
        divisors = []
        for s in panel.series:
            if s.values[0] == 0.0:
                raise ZeroBaseValue(s.name)
            divisors.append(s.values[0])
    if len(divisors) != panel.n:
        raise LengthMismatch("one divisor per series is required")
    out, scale = [], []
    for s, d, old in zip(panel.series, divisors, panel.scale):
        d = float(d)
        if d == 0.0 or not math.isfinite(d):
            raise ZeroBaseValue(s.name)
        out.append(SectorSeries(s.name, s.values / d))
        # scale holds the magnitude only; a negative base flips the series sign
        scale.append(old * abs(d))
    return Panel(panel.grid, tuple(out), panel.kind, tuple(scale))


def aggregate_sectors(panel: Panel, grouping: Mapping[str, str]) -> Panel:
    """Sum source sectors into target sectors.

    Targets appear in order of their first member in the panel. Operates on raw
    panels; normalize afterwards.
    """
    if not grouping:
        raise EmptyGrouping()
    names = set(panel.names)
    for src in grouping:
        if src not in names:
            raise UnknownSector(src)
    for nm in panel.names:
        if nm not in grouping:
            raise UnknownSector(nm)
    sums: dict = {}
    for s in panel.series:
        tgt = grouping[s.name]
        sums[tgt] = sums[tgt] + s.values if tgt in sums else s.values.copy()
    return Panel(panel.grid, tuple(SectorSeries(k, v) for k, v in sums.items()), panel.kind)


def aggregate_total(panel: Panel) -> SectorSeries:
    """Element-wise sum over all sectors, named ``TOTAL``."""
    if panel.n == 0:
        raise EmptyPanel()
    return SectorSeries("TOTAL", panel.matrix().sum(axis=1))
