"""Dynamic Leontief balance: identification, control reconstruction, simulation.

The system is ``B dx/dt = P x - u`` with ``P = E - A``. Given fitted output
trajectories ``x_m(t)`` and observed consumption ``u_m(t)``, ``P`` and ``B``
are identified from the centred regression::

    u(t) - u_bar = P (x(t) - x_bar) - B (dx/dt - b) + r_t

evaluated on the fit window, and the Cauchy problem
``dx/dt = B^-1 (P x - u)``, ``x(t_star) = x_star`` is integrated with
fixed-step RK4.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.linalg

from .errors import DimensionMismatch, RankDeficientRegressors, SingularB, UnstableBlowup
from .harmonic import (
    FrequencySpectrum,
    HarmonicTrendModel,
    evaluate,
    evaluate_derivative,
    fit_normal_equations,
)
from .panel import Panel, TimeGrid

MAX_CONDITION = 1e12
OVERFLOW_GUARD = 1e12
DEFAULT_STEP = 0.01


@dataclass(frozen=True)
class LeontiefSystem:
    P: np.ndarray
    B: np.ndarray
    u_bar: np.ndarray
    x_bar: np.ndarray
    t_star: float
    x_star: np.ndarray
    sectors: tuple = ()

    def __post_init__(self):
        P = np.atleast_2d(np.asarray(self.P, dtype=float))
        B = np.atleast_2d(np.asarray(self.B, dtype=float))
        n = P.shape[0]
        if P.shape != (n, n) or B.shape != (n, n):
            raise DimensionMismatch(f"P {P.shape} and B {B.shape} must both be square and equal")
        vecs = {}
        for nm in ("u_bar", "x_bar", "x_star"):
            v = np.atleast_1d(np.asarray(getattr(self, nm), dtype=float))
            if v.shape != (n,):
                raise DimensionMismatch(f"{nm} has shape {v.shape}, expected ({n},)")
            vecs[nm] = v
        sectors = tuple(self.sectors) or tuple(f"S{j + 1}" for j in range(n))
        if len(sectors) != n:
            raise DimensionMismatch("one sector name per row of P is required")
        object.__setattr__(self, "P", P)
        object.__setattr__(self, "B", B)
        for nm, v in vecs.items():
            object.__setattr__(self, nm, v)
        object.__setattr__(self, "sectors", sectors)

    @property
    def n(self) -> int:
        return self.P.shape[0]

    @property
    def A(self) -> np.ndarray:
        return np.eye(self.n) - self.P

    @property
    def condition_number_B(self) -> float:
        return float(np.linalg.cond(self.B))

    def feasibility(self) -> dict:
        """Economic sign checks; reported only, never enforced."""
        return {
            "A_nonnegative": bool(np.all(self.A >= 0)),
            "B_nonnegative": bool(np.all(self.B >= 0)),
        }

    def state_matrix(self) -> np.ndarray:
        """``B^-1 P``."""
        self._check_B()
        return np.linalg.solve(self.B, self.P)

    def _check_B(self):
        cond = self.condition_number_B
        if not math.isfinite(cond) or cond > MAX_CONDITION:
            raise SingularB(cond)
        return cond


@dataclass(frozen=True)
class ControlModel:
    """Fitted consumption trajectories and the identification residuals ``(N, n)``."""

    models: tuple
    residuals: np.ndarray
    regressor_condition: float = float("nan")   # of the column-scaled regressors

    def __call__(self, t) -> np.ndarray:
        return np.array([evaluate(m, t) for m in self.models])


def reconstruct_control(system: LeontiefSystem, x, x_dot) -> np.ndarray:
    """``u = P x - B dx/dt``."""
    x = np.asarray(x, dtype=float)
    x_dot = np.asarray(x_dot, dtype=float)
    if x.shape != (system.n,) or x_dot.shape != (system.n,):
        raise DimensionMismatch(f"expected vectors of length {system.n}")
    return system.P @ x - system.B @ x_dot


def _model_matrices(x_models: Sequence[HarmonicTrendModel], N: int):
    t = np.arange(1, N + 1, dtype=float)
    X = np.column_stack([evaluate(m, t) for m in x_models])
    Xd = np.column_stack([evaluate_derivative(m, t) for m in x_models])
    return X, Xd


def identify_system(x_models: Sequence[HarmonicTrendModel], u_panel: Panel,
                    window: TimeGrid | None = None, u_ks: Sequence[int] | None = None):
    """Estimate ``P`` and ``B`` by joint OLS on the fitted output trajectories.

    Regressors are ``x(t) - x_bar`` and ``-(dx/dt - b)`` from the models at
    ``t = 1..N``; the response is the observed ``u(t) - u_bar``. Each
    consumption series is also fitted on the union of the output harmonics
    (or ``u_ks``) to give the control model used for simulation.

    Returns ``(LeontiefSystem, ControlModel)``. The boundary defaults to the
    first point after the window, ``t_star = N + 1``.
    """
    x_models = list(x_models)
    n = len(x_models)
    if n == 0:
        raise DimensionMismatch("at least one output model is required")
    N = x_models[0].N
    if any(m.N != N for m in x_models):
        raise DimensionMismatch("output models were fitted on different windows")
    if u_panel.n != n:
        raise DimensionMismatch(f"{u_panel.n} consumption series for {n} output models")
    if u_panel.grid.N != N or (window is not None and window.N != N):
        raise DimensionMismatch(f"consumption panel has {u_panel.grid.N} points, window is {N}")

    X, Xd = _model_matrices(x_models, N)
    x_bar = np.array([m.x_bar for m in x_models])
    slopes = np.array([m.b_slope for m in x_models])
    U = u_panel.matrix()
    u_bar = U.mean(axis=0)

    Z = np.hstack([X - x_bar, -(Xd - slopes)])
    Y = U - u_bar
    norms = np.linalg.norm(Z, axis=0)
    if np.any(norms <= 1e-12 * max(norms.max(), 1.0)):
        raise RankDeficientRegressors("a fitted trajectory or its derivative is constant")
    Zs = Z / norms
    Q, R, perm = scipy.linalg.qr(Zs, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    if Z.shape[0] < Z.shape[1] or diag.min() <= 1e-10 * diag.max():
        raise RankDeficientRegressors(
            f"regressor rank {int(np.sum(diag > 1e-10 * diag.max()))} < {Z.shape[1]}")
    coef_p = scipy.linalg.solve_triangular(R, Q.T @ Y)
    coef = np.empty_like(coef_p)
    coef[perm] = coef_p
    coef /= norms[:, None]
    P = coef[:n].T
    B = coef[n:].T
    resid = Y - Z @ coef

    ks = sorted(set(u_ks) if u_ks is not None else {k for m in x_models for k in m.ks})
    spec = FrequencySpectrum(N, tuple(ks))
    u_models = tuple(fit_normal_equations(s, spec).model for s in u_panel.series)

    t_star = N + 1.0
    x_star = np.array([evaluate(m, t_star) for m in x_models])
    names = tuple(u_panel.names)
    system = LeontiefSystem(P, B, u_bar, x_bar, t_star, x_star, names)
    cond = float(diag.max() / diag.min())
    return system, ControlModel(u_models, resid, cond)


@dataclass(frozen=True)
class RegulatorReport:
    x_max_gap: float
    x_rms_gap: float
    u_max_gap: float | None = None
    u_rms_gap: float | None = None
    x_gap: np.ndarray = field(default=None, repr=False)
    u_gap: np.ndarray = field(default=None, repr=False)


def check_regulator_totals(x_models: Sequence[HarmonicTrendModel], total_x_model: HarmonicTrendModel,
                           u_models: Sequence[HarmonicTrendModel] | ControlModel | None = None,
                           total_u=None, N: int | None = None) -> RegulatorReport:
    """Compare summed sector trajectories with separately fitted totals on ``t = 1..N``.

    ``total_u`` may be a fitted model or an array of observed totals.
    """
    N = N or total_x_model.N
    t = np.arange(1, N + 1, dtype=float)
    x_sum = np.sum([evaluate(m, t) for m in x_models], axis=0)
    x_gap = x_sum - evaluate(total_x_model, t)
    out = dict(x_max_gap=float(np.max(np.abs(x_gap))), x_rms_gap=float(np.sqrt(np.mean(x_gap ** 2))),
               x_gap=x_gap)
    if u_models is not None and total_u is not None:
        if isinstance(u_models, ControlModel):
            u_models = u_models.models
        u_sum = np.sum([evaluate(m, t) for m in u_models], axis=0)
        target = evaluate(total_u, t) if isinstance(total_u, HarmonicTrendModel) \
            else np.asarray(total_u, dtype=float)
        u_gap = u_sum - target
        out.update(u_max_gap=float(np.max(np.abs(u_gap))),
                   u_rms_gap=float(np.sqrt(np.mean(u_gap ** 2))), u_gap=u_gap)
    return RegulatorReport(**out)


@dataclass(frozen=True)
class SimulationResult:
    t0: float
    tf: float
    h: float
    t: np.ndarray
    x: np.ndarray          # (len(t), n)
    method: str = "rk4"

    def at(self, t: float) -> np.ndarray:
        i = int(np.argmin(np.abs(self.t - t)))
        return self.x[i]


def _branch(rhs, t_start, x_start, t_end, h):
    """Fixed-step RK4 from ``t_start`` to ``t_end`` (either direction); the
    last step is shortened to land on ``t_end`` exactly."""
    span = t_end - t_start
    if span == 0:
        return np.array([t_start]), x_start[None, :]
    n_steps = max(1, math.ceil(abs(span) / h - 1e-9))
    step = math.copysign(h, span)
    ts = [t_start]
    xs = [x_start]
    t, x = t_start, x_start
    for i in range(n_steps):
        dt = step if i < n_steps - 1 else (t_end - t)
        k1 = rhs(t, x)
        k2 = rhs(t + dt / 2, x + dt / 2 * k1)
        k3 = rhs(t + dt / 2, x + dt / 2 * k2)
        k4 = rhs(t + dt, x + dt * k3)
        x = x + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        t = t_start + (i + 1) * step if i < n_steps - 1 else t_end
        norm = float(np.max(np.abs(x)))
        if not math.isfinite(norm) or norm > OVERFLOW_GUARD:
            raise UnstableBlowup(t, norm)
        ts.append(t)
        xs.append(x)
    return np.array(ts), np.array(xs)


def simulate(system: LeontiefSystem, u_fn: Callable[[float], np.ndarray], interval,
             h: float = DEFAULT_STEP, t_star: float | None = None,
             x_star=None) -> SimulationResult:
    """Integrate ``dx/dt = B^-1 (P x - u(t))`` through the boundary point.

    Integration runs forward from ``t_star`` to ``tf`` and backward to ``t0``;
    both branches start from the same boundary state.
    """
    t0, tf = map(float, interval)
    if h <= 0:
        raise ValueError("step must be positive")
    t_star = system.t_star if t_star is None else float(t_star)
    x_star = system.x_star if x_star is None else np.asarray(x_star, dtype=float)
    if not (t0 <= t_star <= tf):
        raise ValueError(f"t_star={t_star} outside [{t0}, {tf}]")
    system._check_B()
    lu = scipy.linalg.lu_factor(system.B)
    M = scipy.linalg.lu_solve(lu, system.P)

    def rhs(t, x):
        return M @ x - scipy.linalg.lu_solve(lu, np.asarray(u_fn(t), dtype=float))

    tb, xb = _branch(rhs, t_star, x_star, t0, h)
    tf_, xf = _branch(rhs, t_star, x_star, tf, h)
    t = np.concatenate([tb[::-1], tf_[1:]])
    x = np.vstack([xb[::-1], xf[1:]])
    return SimulationResult(t0, tf, h, t, x)
