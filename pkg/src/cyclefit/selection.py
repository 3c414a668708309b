"""Harmonic selection by Student t-tests and period search by back-extrapolation."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy import stats

from .errors import EmptyRange, NoCovariance, WindowTooLong, ZeroDofResidual
from .harmonic import FitResult, FrequencySpectrum, evaluate, fit_normal_equations, max_harmonic
from .panel import SectorSeries

DEFAULT_ALPHA = 0.005
DEFAULT_K_MAX = 6


@dataclass(frozen=True)
class CoefficientTest:
    name: str
    estimate: float
    std_error: float
    t_stat: float
    p_value: float
    kept: bool


@dataclass(frozen=True)
class SignificanceReport:
    alpha: float
    entries: tuple
    dropped_k: tuple = ()
    dof: int = 0

    def entry(self, name: str) -> CoefficientTest:
        for e in self.entries:
            if e.name == name:
                return e
        raise KeyError(name)

    def harmonic_p(self, k: int) -> float:
        """Best (smallest) p-value of the cos/sin pair for harmonic ``k``."""
        return min(self.entry(f"a_{k}").p_value, self.entry(f"b_{k}").p_value)

    @property
    def ks(self) -> tuple:
        return tuple(int(e.name[2:]) for e in self.entries if e.name.startswith("a_"))

    @property
    def significant_k(self) -> tuple:
        return tuple(k for k in self.ks if self.harmonic_p(k) <= self.alpha)


def _p_value(est: float, se: float, dof: int):
    if se > 0.0 and math.isfinite(se):
        t = est / se
        return t, float(2.0 * stats.t.sf(abs(t), dof))
    if se == 0.0 and est != 0.0:
        return math.copysign(math.inf, est), 0.0
    return 0.0, 1.0


def t_statistics(fit: FitResult, alpha: float = DEFAULT_ALPHA) -> SignificanceReport:
    """Two-sided t-tests on every fitted coefficient, ``N - p`` degrees of freedom.

    A coefficient with zero standard error is significant iff its estimate is
    nonzero. ``kept`` on a harmonic's entries reflects the pair rule: both
    members are kept when either passes.
    """
    if fit.covariance is None:
        raise NoCovariance("t-tests need the normal-equations fit")
    dof = fit.N - fit.n_params
    if dof < 1:
        raise ZeroDofResidual(f"no residual degrees of freedom (N={fit.N}, p={fit.n_params})")
    est = fit.model.coefficients()
    se = np.sqrt(np.clip(np.diag(fit.covariance), 0.0, None))
    raw = [_p_value(float(e), float(s), dof) for e, s in zip(est, se)]
    names = fit.coef_names
    pvals = dict(zip(names, (p for _, p in raw)))
    entries = []
    for nm, e, s, (t, p) in zip(names, est, se, raw):
        if nm == "b":
            kept = True
        else:
            k = nm[2:]
            kept = min(pvals[f"a_{k}"], pvals[f"b_{k}"]) <= alpha
        entries.append(CoefficientTest(nm, float(e), float(s), float(t), p, kept))
    return SignificanceReport(alpha, tuple(entries), (), dof)


def prune_insignificant(series, initial_k_set: Iterable[int], alpha: float = DEFAULT_ALPHA):
    """Backward elimination of harmonics, one pair per step.

    Each round refits and drops the harmonic whose best member p-value is
    largest, provided it exceeds ``alpha``. Returns ``(fit, report)``; the
    report lists the removed ``k`` in removal order.
    """
    values = series.values if isinstance(series, SectorSeries) else np.asarray(series, float)
    N = len(values)
    ks = sorted(set(int(k) for k in initial_k_set))
    dropped = []
    while True:
        fit = fit_normal_equations(series, FrequencySpectrum(N, tuple(ks)))
        if not ks:
            return fit, SignificanceReport(alpha, (), tuple(dropped), N - fit.n_params)
        report = t_statistics(fit, alpha)
        worst_k, worst_p = max(((k, report.harmonic_p(k)) for k in ks), key=lambda kp: kp[1])
        if worst_p <= alpha:
            return fit, SignificanceReport(alpha, report.entries, tuple(dropped), report.dof)
        ks.remove(worst_k)
        dropped.append(worst_k)


def default_k_max_rule(T: int, k_max: int = DEFAULT_K_MAX) -> int:
    """Cap the candidate harmonics at ``k_max`` and below Nyquist, keeping
    at least a quarter of the window as residual degrees of freedom."""
    dof_cap = (T - 1 - max(4, T // 4)) // 2
    return max(0, min(k_max, max_harmonic(T), dof_cap))


def default_holdback(T: int) -> int:
    return max(4, math.ceil(0.1 * T))


@dataclass(frozen=True)
class PeriodSearchResult:
    candidates: tuple           # (T, backcast_rmse) pairs
    chosen_T: int
    holdback_length: int
    kept_k: dict = field(default_factory=dict)


def backcast_rmse(series, T: int, holdback: int, k_max_rule: Callable[[int], int],
                  alpha: float):
    """Fit the last ``T`` points, prune, and score the model on the preceding
    ``holdback`` points (internal times ``0, -1, ...``)."""
    x = series.values if isinstance(series, SectorSeries) else np.asarray(series, float)
    L = len(x)
    window = x[L - T:]
    fit, report = prune_insignificant(window, range(1, k_max_rule(T) + 1), alpha)
    t_back = np.arange(1 - holdback, 1, dtype=float)
    observed = x[L - T - holdback:L - T]
    err = evaluate(fit.model, t_back) - observed
    return float(np.sqrt(np.mean(err ** 2))), fit.model.ks


def select_period(series, T_range: Sequence[int], holdback: int | None = None,
                  k_max_rule: Callable[[int], int] | int | None = None,
                  alpha: float = DEFAULT_ALPHA) -> PeriodSearchResult:
    """Choose the fluctuation period ``T`` minimising back-extrapolation RMSE.

    ``T_range`` is an iterable of candidate periods (e.g. ``range(30, 71)``).
    ``holdback`` defaults to ``max(4, ceil(0.1 * max(T_range)))`` and is the
    same for every candidate, so scores are comparable. Scores within a
    relative ``1e-9`` of the best (or below ``1e-9`` of the series' spread)
    count as tied and resolve to the smaller ``T``.
    """
    Ts = sorted(set(int(T) for T in T_range))
    if not Ts:
        raise EmptyRange("empty candidate period range")
    if holdback is None:
        holdback = default_holdback(Ts[-1])
    if holdback < 1:
        raise EmptyRange("holdback must be at least 1")
    x = series.values if isinstance(series, SectorSeries) else np.asarray(series, float)
    if len(x) < Ts[-1] + holdback:
        raise WindowTooLong(
            f"series of length {len(x)} cannot hold T={Ts[-1]} plus {holdback} holdback points")
    if k_max_rule is None:
        rule = default_k_max_rule
    elif isinstance(k_max_rule, int):
        cap = k_max_rule
        rule = lambda T: default_k_max_rule(T, cap)  # noqa: E731
    else:
        rule = k_max_rule

    scores, kept = [], {}
    for T in Ts:
        score, ks = backcast_rmse(x, T, holdback, rule, alpha)
        scores.append((T, score))
        kept[T] = ks
    best = min(s for _, s in scores)
    spread = float(np.ptp(x)) if len(x) else 0.0
    tol = max(1e-9 * best, 1e-9 * spread)
    chosen = next(T for T, s in scores if s <= best + tol)
    return PeriodSearchResult(tuple(scores), chosen, holdback, kept)


def phase_dimension(reports: Sequence[SignificanceReport] | SignificanceReport) -> int:
    """Phase-space dimension: distinct significant harmonics plus one for the trend.

    Pass the aggregate-series report (or a list whose first entry is it); with
    several reports the union of their significant harmonics is counted.
    """
    if isinstance(reports, SignificanceReport):
        reports = [reports]
    if not reports:
        raise ValueError("at least one report is required")
    ks = set()
    for r in reports:
        ks.update(r.significant_k)
    return len(ks) + 1
