"""Coefficients of determination for trend, full model, fluctuation and each harmonic."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConstantSeries, ZeroFluctuation
from .harmonic import FitResult

# sums of squares at or below this fraction of the data's energy count as zero
_ZERO_RTOL = 1e-20


@dataclass(frozen=True)
class FitDiagnostics:
    r2_trend: float
    r2_overall: float
    r2_fluct: float
    harmonic_shares: dict

    @property
    def shares_total(self) -> float:
        return float(sum(self.harmonic_shares.values()))


def _total_ss(fit: FitResult) -> float:
    dev = fit.x - fit.x.mean()
    tss = float(dev @ dev)
    if tss <= _ZERO_RTOL * max(float(fit.x @ fit.x), np.finfo(float).tiny):
        raise ConstantSeries(f"series {fit.sector or '<unnamed>'} has zero variance")
    return tss


def _eps_ss(fit: FitResult) -> float:
    ess = float(fit.eps @ fit.eps)
    energy = max(float(fit.x @ fit.x), np.finfo(float).tiny)
    if ess <= _ZERO_RTOL * energy:
        raise ZeroFluctuation(f"series {fit.sector or '<unnamed>'} has no fluctuation about its trend")
    return ess


def r2_trend(fit: FitResult) -> float:
    """``b^2 N (N^2 - 1) / 12`` over the total sum of squares."""
    N = fit.N
    return fit.model.b_slope ** 2 * (N * N - 1) / 12.0 * N / _total_ss(fit)


def r2_overall(fit: FitResult) -> float:
    """``1 - RSS / TSS`` with the RSS taken from the actual residuals."""
    return 1.0 - float(fit.residuals @ fit.residuals) / _total_ss(fit)


def r2_fluct(fit: FitResult) -> float:
    """Share of the detrended sum of squares carried by the harmonics.

    A trend-only model has ``0``; if there is no fluctuation at all,
    :class:`ZeroFluctuation` is raised.
    """
    ess = _eps_ss(fit)
    c2 = sum(h.c ** 2 for h in fit.model.terms)
    return fit.N / 2.0 * c2 / ess


def harmonic_shares(fit: FitResult) -> dict:
    """Per-harmonic share ``(N/2) c_k^2 / sum eps^2`` keyed by ``k``."""
    ess = _eps_ss(fit)
    return {h.k: fit.N / 2.0 * h.c ** 2 / ess for h in fit.model.terms}


def harmonic_shares_from_fluct(fit: FitResult) -> dict:
    """The same shares computed as ``c_k^2 / sum c^2 * r2_fluct``."""
    c2 = {h.k: h.c ** 2 for h in fit.model.terms}
    total = sum(c2.values())
    if total == 0.0:
        return {k: 0.0 for k in c2}
    fl = r2_fluct(fit)
    return {k: v / total * fl for k, v in c2.items()}


def rss_identity_gap(fit: FitResult) -> float:
    """Relative gap between ``sum nu^2`` and ``sum eps^2 - (N/2) sum c^2``."""
    S = float(fit.residuals @ fit.residuals)
    ess = float(fit.eps @ fit.eps)
    formula = ess - fit.N / 2.0 * sum(h.c ** 2 for h in fit.model.terms)
    return abs(S - formula) / max(ess, 1e-12)


def diagnose(fit: FitResult) -> FitDiagnostics:
    """All four measures; the fluctuation measures are ``nan`` when the series
    has no fluctuation about its trend."""
    try:
        fl = r2_fluct(fit)
        shares = harmonic_shares(fit)
    except ZeroFluctuation:
        fl, shares = float("nan"), {h.k: float("nan") for h in fit.model.terms}
    return FitDiagnostics(r2_trend(fit), r2_overall(fit), fl, shares)
