"""Trend-plus-harmonics regression on the exact Fourier grid.

A series observed at ``t = 1..N`` is modelled as::

    x(t) = x_bar + b (t - t_bar) + sum_k (a_k cos(w_k t) + b_k sin(w_k t))

with ``t_bar = (N + 1) / 2`` and ``w_k = 2 pi k / N``. Two estimators are
provided: the closed-form expressions in :func:`fit_closed_form` and a general
least-squares solve in :func:`fit_normal_equations`, which is the reference.
On the exact grid the harmonic columns are mutually orthogonal and have zero
mean, which is what makes the closed form possible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
import scipy.linalg

from .errors import (
    DegenerateDenominator,
    EmptyKSet,
    KAboveNyquist,
    LengthMismatch,
    RankDeficientDesign,
)
from .panel import MIN_FIT_LENGTH, SectorSeries

CLOSED_FORM = "closed_form"
NORMAL_EQUATIONS = "normal_equations"

# relative deviation between estimators above which a coefficient is flagged
DISCREPANCY_RTOL = 1e-6


def _admissible(k: int, N: int) -> bool:
    return 1 <= k and 2 * k < N


@dataclass(frozen=True)
class FrequencySpectrum:
    """Harmonic indices ``k`` on the grid ``w_k = 2 pi k / N``.

    May be empty (trend-only model); use :func:`spectrum` for the checked
    public constructor.
    """

    N: int
    ks: tuple = ()

    def __post_init__(self):
        if self.N < MIN_FIT_LENGTH:
            raise LengthMismatch(f"need N >= {MIN_FIT_LENGTH}, got {self.N}")
        ks = tuple(sorted({int(k) for k in self.ks}))
        for k in ks:
            if not _admissible(k, self.N):
                raise KAboveNyquist(k, self.N)
        object.__setattr__(self, "ks", ks)

    @property
    def omegas(self) -> np.ndarray:
        return 2.0 * np.pi * np.asarray(self.ks, dtype=float) / self.N

    @property
    def frequencies(self) -> list:
        return list(zip(self.ks, self.omegas.tolist()))

    def __len__(self):
        return len(self.ks)


def spectrum(N: int, k_set: Iterable[int]) -> FrequencySpectrum:
    ks = tuple(k_set)
    if not ks:
        raise EmptyKSet()
    return FrequencySpectrum(N, ks)


def max_harmonic(N: int) -> int:
    """Largest admissible ``k`` for window length ``N``."""
    return (N - 1) // 2


@dataclass(frozen=True)
class HarmonicTerm:
    k: int
    a: float
    b: float

    @property
    def c(self) -> float:
        return math.hypot(self.a, self.b)


@dataclass(frozen=True)
class HarmonicTrendModel:
    x_bar: float
    b_slope: float
    terms: tuple
    N: int
    estimator: str = NORMAL_EQUATIONS

    def __post_init__(self):
        terms = tuple(sorted(self.terms, key=lambda h: h.k))
        ks = [h.k for h in terms]
        if len(set(ks)) != len(ks):
            raise ValueError(f"duplicate harmonic indices {ks}")
        for k in ks:
            if not _admissible(k, self.N):
                raise KAboveNyquist(k, self.N)
        object.__setattr__(self, "terms", terms)

    @property
    def t_bar(self) -> float:
        return (self.N + 1) / 2.0

    @property
    def ks(self) -> tuple:
        return tuple(h.k for h in self.terms)

    def omega(self, k: int) -> float:
        return 2.0 * np.pi * k / self.N

    @property
    def spectrum(self) -> FrequencySpectrum:
        return FrequencySpectrum(self.N, self.ks)

    def term(self, k: int) -> HarmonicTerm:
        for h in self.terms:
            if h.k == k:
                return h
        raise KeyError(k)

    def coefficients(self) -> np.ndarray:
        """``[b, a_k1, b_k1, a_k2, b_k2, ...]`` in ascending ``k``."""
        out = [self.b_slope]
        for h in self.terms:
            out += [h.a, h.b]
        return np.array(out)

    def harmonic(self, k: int, t):
        """Value of the single harmonic ``k`` at ``t``."""
        h = self.term(k)
        w = self.omega(k)
        t = np.asarray(t, dtype=float)
        return h.a * np.cos(w * t) + h.b * np.sin(w * t)

    def __call__(self, t):
        return evaluate(self, t)

    @classmethod
    def from_intercept(cls, intercept: float, slope: float, terms: Sequence, N: int,
                       estimator: str = NORMAL_EQUATIONS) -> "HarmonicTrendModel":
        """Build from the ``intercept + slope * t + ...`` form used when reporting."""
        x_bar = intercept + slope * (N + 1) / 2.0
        terms = tuple(h if isinstance(h, HarmonicTerm) else HarmonicTerm(*h) for h in terms)
        return cls(x_bar, slope, terms, N, estimator)


def evaluate(model: HarmonicTrendModel, t):
    """Model trajectory at ``t`` (scalar or array); ``t`` may lie outside ``[1, N]``."""
    t = np.asarray(t, dtype=float)
    out = model.x_bar + model.b_slope * (t - model.t_bar)
    for h in model.terms:
        w = model.omega(h.k)
        out = out + h.a * np.cos(w * t) + h.b * np.sin(w * t)
    return out if out.ndim else float(out)


def evaluate_derivative(model: HarmonicTrendModel, t):
    """Analytic time derivative of :func:`evaluate`."""
    t = np.asarray(t, dtype=float)
    out = np.full_like(t, model.b_slope, dtype=float)
    for h in model.terms:
        w = model.omega(h.k)
        out = out + w * (-h.a * np.sin(w * t) + h.b * np.cos(w * t))
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class Discrepancy:
    coef: str
    closed_form: float
    normal_eq: float
    rel_diff: float

    @property
    def deviates(self) -> bool:
        return self.rel_diff > DISCREPANCY_RTOL


@dataclass(frozen=True)
class FitResult:
    """A fitted model together with its residual vectors.

    ``residuals`` are ``x_t - model(t)``; ``eps`` are the detrended values
    ``x_t - x_bar - b (t - t_bar)``. ``covariance`` is only set by the
    normal-equations estimator.
    """

    model: HarmonicTrendModel
    x: np.ndarray
    residuals: np.ndarray
    eps: np.ndarray
    covariance: np.ndarray | None = None
    sector: str = ""
    discrepancy: tuple = field(default=())

    @property
    def N(self) -> int:
        return self.model.N

    @property
    def n_params(self) -> int:
        """Fitted design columns: the trend plus a cos/sin pair per harmonic."""
        return 1 + 2 * len(self.model.terms)

    @property
    def coef_names(self) -> list:
        return coefficient_names(self.model.ks)


def coefficient_names(ks: Iterable[int]) -> list:
    names = ["b"]
    for k in ks:
        names += [f"a_{k}", f"b_{k}"]
    return names


def _check(series, spec: FrequencySpectrum):
    x = series.values if isinstance(series, SectorSeries) else np.asarray(series, dtype=float)
    name = series.name if isinstance(series, SectorSeries) else ""
    if x.ndim != 1 or len(x) != spec.N:
        raise LengthMismatch(f"series length {len(x)} does not match spectrum N={spec.N}")
    return np.asarray(x, dtype=float), name


def _as_spectrum(spec, N):
    if isinstance(spec, FrequencySpectrum):
        return spec
    return FrequencySpectrum(N, tuple(spec))


def design_matrix(N: int, ks: Sequence[int]) -> np.ndarray:
    """Columns ``t - t_bar, cos w_k t, sin w_k t, ...`` over ``t = 1..N``."""
    t = np.arange(1, N + 1, dtype=float)
    cols = [t - (N + 1) / 2.0]
    for k in ks:
        w = 2.0 * np.pi * k / N
        cols += [np.cos(w * t), np.sin(w * t)]
    return np.column_stack(cols)


def _finish(x, name, x_bar, b, terms, N, estimator, cov=None):
    model = HarmonicTrendModel(x_bar, b, tuple(terms), N, estimator)
    t = np.arange(1, N + 1, dtype=float)
    eps = x - x_bar - b * (t - model.t_bar)
    resid = x - evaluate(model, t)
    return FitResult(model, x, resid, eps, cov, name)


def fit_closed_form(series, spec) -> FitResult:
    """Explicit estimator for the trend slope and harmonic coefficients.

    Uses, with ``S_c = sum x_t cos w_k t`` and ``S_s = sum x_t sin w_k t``::

        b   = (2/N) sum (x_t - x_bar)(t + sum_k(cot(w_k/2) sin w_k t - cos w_k t))
              / ((N^2 - 1)/6 - sum_k 1/sin^2(w_k/2))
        a_k = (2/N) S_c - b
        b_k = (2/N) S_s + b cot(w_k/2)

    These are the joint least-squares solution when every ``w_k`` lies on the
    exact ``2 pi k / N`` grid (the harmonic columns are then orthogonal with
    squared norm ``N/2``, and ``sum t cos = N/2``, ``sum t sin = -(N/2) cot(w/2)``).
    """
    spec = _as_spectrum(spec, len(getattr(series, "values", series)))
    x, name = _check(series, spec)
    N = spec.N
    t = np.arange(1, N + 1, dtype=float)
    x_bar = float(x.mean())
    w = spec.omegas
    cot_half = 1.0 / np.tan(w / 2.0)

    weight = t.copy()
    for wk, ck in zip(w, cot_half):
        weight += ck * np.sin(wk * t) - np.cos(wk * t)
    base = (N * N - 1) / 6.0
    denom = base - float(np.sum(1.0 / np.sin(w / 2.0) ** 2))
    if abs(denom) <= 1e-9 * base:
        raise DegenerateDenominator(
            f"slope denominator vanishes ({denom:.3e}) for N={N}, k={spec.ks}")
    b = (2.0 / N) * float(np.dot(x - x_bar, weight)) / denom

    terms = []
    for k, wk, ck in zip(spec.ks, w, cot_half):
        a_k = (2.0 / N) * float(np.dot(x, np.cos(wk * t))) - b
        b_k = (2.0 / N) * float(np.dot(x, np.sin(wk * t))) + b * ck
        terms.append(HarmonicTerm(k, a_k, b_k))
    return _finish(x, name, x_bar, b, terms, N, CLOSED_FORM)


def _qr_solve(X: np.ndarray, y: np.ndarray, rtol: float = 1e-10):
    """Least squares via column-pivoted QR; returns ``(beta, (X^T X)^-1)``.

    Raises :class:`RankDeficientDesign` if any pivot falls below ``rtol`` times
    the largest (after unit-norm column scaling).
    """
    norms = np.linalg.norm(X, axis=0)
    if np.any(norms == 0.0):
        raise RankDeficientDesign(f"design has {int(np.sum(norms == 0))} all-zero column(s)")
    Xs = X / norms
    Q, R, perm = scipy.linalg.qr(Xs, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    if diag.size and diag.min() <= rtol * diag.max():
        rank = int(np.sum(diag > rtol * diag.max()))
        raise RankDeficientDesign(f"design rank {rank} < {X.shape[1]} columns")
    z = scipy.linalg.solve_triangular(R, Q.T @ y)
    beta_s = np.empty_like(z)
    beta_s[perm] = z
    R_inv = scipy.linalg.solve_triangular(R, np.eye(R.shape[0]))
    # (X^T X)^-1 in the original (unscaled, unpermuted) coordinates
    inv_s = np.empty_like(R_inv)
    inv_p = R_inv @ R_inv.T
    inv_s[np.ix_(perm, perm)] = inv_p
    xtx_inv = inv_s / np.outer(norms, norms)
    return beta_s / norms, xtx_inv


def fit_normal_equations(series, spec) -> FitResult:
    """Least-squares fit of the centred series on the trend and harmonic columns.

    All regressors have zero mean over a full period, so the intercept is the
    sample mean and is not part of the design. The covariance is
    ``s^2 (X^T X)^-1`` with ``s^2 = RSS / (N - p)``, ``p`` the number of design
    columns; it is ``inf``-filled when ``N == p``.
    """
    spec = _as_spectrum(spec, len(getattr(series, "values", series)))
    x, name = _check(series, spec)
    N = spec.N
    X = design_matrix(N, spec.ks)
    if X.shape[1] > N:
        raise RankDeficientDesign(f"{X.shape[1]} columns exceed {N} observations")
    x_bar = float(x.mean())
    beta, xtx_inv = _qr_solve(X, x - x_bar)
    b = float(beta[0])
    terms = [HarmonicTerm(k, float(beta[1 + 2 * i]), float(beta[2 + 2 * i]))
             for i, k in enumerate(spec.ks)]
    fit = _finish(x, name, x_bar, b, terms, N, NORMAL_EQUATIONS)
    dof = N - X.shape[1]
    rss_ = float(fit.residuals @ fit.residuals)
    s2 = rss_ / dof if dof > 0 else math.inf
    cov = s2 * xtx_inv if dof > 0 else np.full_like(xtx_inv, math.inf)
    return FitResult(fit.model, fit.x, fit.residuals, fit.eps, cov, name)


def rss(fit: FitResult) -> tuple:
    """Direct residual sum of squares and the orthogonality-based formula.

    Returns ``(sum nu_t^2, sum eps_t^2 - (N/2) sum c_k^2)``; the two agree for
    an exact-grid least-squares fit.
    """
    S = float(fit.residuals @ fit.residuals)
    c2 = sum(h.c ** 2 for h in fit.model.terms)
    formula = float(fit.eps @ fit.eps) - fit.N / 2.0 * c2
    return S, formula


def compare_estimators(series, spec) -> tuple:
    """Fit both ways and attach a per-coefficient discrepancy report.

    Returns ``(normal_equations_fit, closed_form_fit)``; the reference fit
    carries the report in ``discrepancy``.
    """
    spec = _as_spectrum(spec, len(getattr(series, "values", series)))
    ref = fit_normal_equations(series, spec)
    cf = fit_closed_form(series, spec)
    ref_c = ref.model.coefficients()
    cf_c = cf.model.coefficients()
    # floor the denominator so round-off on exact zeros is not flagged
    scale = max(float(np.max(np.abs(ref_c))), abs(ref.model.x_bar), float(np.std(ref.x)))
    floor = DISCREPANCY_RTOL * max(scale, np.finfo(float).tiny)
    report = []
    for nm, c, r in zip(coefficient_names(spec.ks), cf_c, ref_c):
        rel = abs(c - r) / max(abs(r), abs(c), floor)
        report.append(Discrepancy(nm, float(c), float(r), float(rel)))
    return FitResult(ref.model, ref.x, ref.residuals, ref.eps, ref.covariance,
                     ref.sector, tuple(report)), cf
