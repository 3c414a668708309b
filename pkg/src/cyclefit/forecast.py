"""Forecasts beyond the fit window, holdout scoring and harmonic turning points."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .errors import LengthMismatch, NoHarmonics
from .harmonic import HarmonicTrendModel, evaluate, max_harmonic
from .panel import SectorSeries
from .selection import DEFAULT_ALPHA, DEFAULT_K_MAX, prune_insignificant

HORIZON_WARN_FRACTION = 0.2


@dataclass(frozen=True)
class ForecastResult:
    t: np.ndarray
    value: np.ndarray
    observed: np.ndarray | None = None
    mae: float | None = None
    rmse: float | None = None
    mape: float | None = None          # percent; None when undefined
    mape_undefined: bool = False


def _score(t, value, observed):
    observed = np.asarray(observed, dtype=float)
    if observed.shape != value.shape:
        raise LengthMismatch(f"{observed.size} observations for {value.size} forecast points")
    err = value - observed
    mae = float(np.mean(np.abs(err)))
    rmse = float(np.sqrt(np.mean(err ** 2)))
    if np.any(observed == 0.0):
        return ForecastResult(t, value, observed, mae, rmse, None, True)
    mape = float(100.0 * np.mean(np.abs(err / observed)))
    return ForecastResult(t, value, observed, mae, rmse, mape, False)


def forecast(model: HarmonicTrendModel, horizon: int, observed=None) -> ForecastResult:
    """Evaluate the model at ``t = N+1..N+H``; score against ``observed`` if given."""
    if horizon < 1:
        raise ValueError("horizon must be at least 1")
    if horizon > HORIZON_WARN_FRACTION * model.N:
        warnings.warn(f"horizon {horizon} exceeds {HORIZON_WARN_FRACTION:.0%} of the "
                      f"window N={model.N}; long-range extrapolation", stacklevel=2)
    t = np.arange(model.N + 1, model.N + horizon + 1, dtype=float)
    value = np.asarray(evaluate(model, t), dtype=float)
    if observed is None:
        return ForecastResult(t, value)
    return _score(t, value, observed)


@dataclass(frozen=True)
class PipelineConfig:
    k_max: int = DEFAULT_K_MAX
    alpha: float = DEFAULT_ALPHA
    k_set: tuple | None = None      # explicit candidate harmonics override k_max

    def candidates(self, N: int) -> tuple:
        if self.k_set is not None:
            return tuple(self.k_set)
        return tuple(range(1, min(self.k_max, max_harmonic(N)) + 1))


def holdout_evaluate(series, N: int, H: int, config: PipelineConfig = PipelineConfig()):
    """Fit and prune on the first ``N`` points, forecast and score the last ``H``.

    Returns ``(ForecastResult, fit, report)``.
    """
    x = series.values if isinstance(series, SectorSeries) else np.asarray(series, float)
    if len(x) != N + H:
        raise LengthMismatch(f"series has {len(x)} points, expected N + H = {N + H}")
    fit, report = prune_insignificant(x[:N], config.candidates(N), config.alpha)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        result = forecast(fit.model, H, x[N:])
    return result, fit, report


@dataclass(frozen=True)
class TurningPoint:
    k: int
    t: float
    direction: str          # "to_rising" at a trough, "to_falling" at a crest
    year: float | None = None


@dataclass(frozen=True)
class PhaseSchedule:
    t_a: float
    t_b: float
    turns: dict = field(default_factory=dict)     # k -> tuple of TurningPoint

    def events(self) -> list:
        """All turning points in time order."""
        return sorted((p for pts in self.turns.values() for p in pts), key=lambda p: (p.t, p.k))


def phase_schedule(model: HarmonicTrendModel, interval, t0_label: int | None = None,
                   ks: Iterable[int] | None = None) -> PhaseSchedule:
    """Crests and troughs of each harmonic within ``[t_a, t_b]``.

    Writing ``a cos wt + b sin wt = c cos(wt - phi)`` with ``phi = atan2(b, a)``,
    extrema sit at ``t = (phi / pi + m) N / (2k)``: crests for even ``m``, troughs
    for odd ``m``, spaced ``N / (2k)`` apart. ``t0_label`` converts to calendar
    years with ``year = t0_label + t - 1``.
    """
    if not model.terms:
        raise NoHarmonics("model has no harmonic terms")
    t_a, t_b = map(float, interval)
    wanted = set(ks) if ks is not None else set(model.ks)
    turns = {}
    for h in model.terms:
        if h.k not in wanted:
            continue
        if h.a == 0.0 and h.b == 0.0:
            turns[h.k] = ()
            continue
        half = model.N / (2.0 * h.k)         # pi / w_k, the crest-to-trough spacing
        shift = math.atan2(h.b, h.a) / math.pi
        m = math.ceil(t_a / half - shift - 1e-12)
        pts = []
        while True:
            t = (shift + m) * half
            if t > t_b + 1e-12:
                break
            if t >= t_a - 1e-12:
                direction = "to_falling" if m % 2 == 0 else "to_rising"
                year = None if t0_label is None else t0_label + t - 1
                pts.append(TurningPoint(h.k, t, direction, year))
            m += 1
        turns[h.k] = tuple(pts)
    return PhaseSchedule(t_a, t_b, turns)
