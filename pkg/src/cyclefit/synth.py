"""Synthetic panels with known generating parameters.

Noise is drawn from numpy's ``Generator(PCG64(seed))`` with
``standard_normal`` (ziggurat), one independent stream per sector spawned
from the seed via ``SeedSequence``; the full output is fixed by the seed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, InadmissibleK
from .harmonic import HarmonicTerm, HarmonicTrendModel, evaluate, evaluate_derivative
from .panel import Panel, SectorSeries, TimeGrid


@dataclass(frozen=True)
class SectorSpec:
    name: str
    x_bar: float
    b: float
    harmonics: tuple = ()   # (k, a_k, b_k) triples
    sigma: float = 0.0

    def model(self, N: int) -> HarmonicTrendModel:
        return HarmonicTrendModel(self.x_bar, self.b,
                                  tuple(HarmonicTerm(int(k), float(a), float(b))
                                        for k, a, b in self.harmonics), N)


@dataclass(frozen=True)
class GeneratorSpec:
    """Ground truth for :func:`generate_panel`.

    ``N`` is the period that fixes the frequency grid and ``t_bar``;
    ``length`` samples (default ``N``) are generated at ``t = 1..length``.
    With ``P`` and ``B`` set, a consumption panel ``u = P x - B dx/dt`` is built
    from the noiseless trajectories.
    """

    N: int
    sectors: tuple
    seed: int = 0
    length: int | None = None
    t0_label: int = 1
    P: tuple | None = None
    B: tuple | None = None

    def __post_init__(self):
        if self.sigma_min() < 0:
            raise ValueError("noise sigma must be non-negative")
        for s in self.sectors:
            for k, _, _ in s.harmonics:
                if not (1 <= k and 2 * k < self.N):
                    raise InadmissibleK(k, self.N)
        if (self.P is None) != (self.B is None):
            raise DimensionMismatch("P and B must be given together")
        if self.P is not None:
            n = len(self.sectors)
            if np.shape(self.P) != (n, n) or np.shape(self.B) != (n, n):
                raise DimensionMismatch(f"P and B must be {n}x{n}")

    def sigma_min(self) -> float:
        return min((s.sigma for s in self.sectors), default=0.0)

    @property
    def n_samples(self) -> int:
        return self.length if self.length is not None else self.N

    def models(self) -> list:
        return [s.model(self.N) for s in self.sectors]


def generate_panel(spec: GeneratorSpec):
    """Return ``(x_panel, u_panel or None, spec)``."""
    L = spec.n_samples
    t = np.arange(1, L + 1, dtype=float)
    grid = TimeGrid(spec.t0_label, L)
    streams = np.random.SeedSequence(spec.seed).spawn(len(spec.sectors))
    clean, noisy = [], []
    for s, ss in zip(spec.sectors, streams):
        x = np.asarray(evaluate(s.model(spec.N), t), dtype=float)
        clean.append(x)
        rng = np.random.Generator(np.random.PCG64(ss))
        noise = rng.standard_normal(L) * s.sigma
        noisy.append(SectorSeries(s.name, x + noise))
    x_panel = Panel(grid, tuple(noisy), "output")

    u_panel = None
    if spec.P is not None:
        P = np.asarray(spec.P, dtype=float)
        B = np.asarray(spec.B, dtype=float)
        X = np.column_stack(clean)
        Xd = np.column_stack([evaluate_derivative(m, t) for m in spec.models()])
        U = X @ P.T - Xd @ B.T
        u_panel = Panel(grid, tuple(SectorSeries(s.name, U[:, j])
                                    for j, s in enumerate(spec.sectors)), "consumption")
    return x_panel, u_panel, spec


def random_spec(rng: np.random.Generator, N: int, ks, n: int = 1, sigma: float = 0.0,
                seed: int = 0, amplitude=(0.5, 3.0), length: int | None = None,
                leontief: bool = False, names=None) -> GeneratorSpec:
    """Draw a random :class:`GeneratorSpec` with every sector using harmonics ``ks``.

    With ``leontief=True`` a random ``P`` and a well-conditioned ``B`` are added.
    """
    names = names or [f"S{j + 1}" for j in range(n)]
    sectors = []
    for nm in names:
        harmonics = []
        for k in ks:
            c = rng.uniform(*amplitude)
            phi = rng.uniform(0, 2 * np.pi)
            harmonics.append((int(k), c * np.cos(phi), c * np.sin(phi)))
        sectors.append(SectorSpec(nm, float(rng.uniform(5, 20)), float(rng.uniform(-0.5, 0.5)),
                                  tuple(harmonics), sigma))
    P = B = None
    if leontief:
        P = np.eye(n) - rng.uniform(0.0, 0.3, (n, n)) / n
        B = np.diag(rng.uniform(1.0, 3.0, n)) + rng.uniform(-0.2, 0.2, (n, n)) / n
        P, B = tuple(map(tuple, P)), tuple(map(tuple, B))
    return GeneratorSpec(N, tuple(sectors), seed, length, 1, P, B)


def leontief_spec(rng: np.random.Generator, n: int, N: int = 50, sigma_rel: float = 0.0,
                  seed: int = 0) -> GeneratorSpec:
    """Random joint output/consumption spec with an identifiable design.

    Sector ``j`` carries a dominant harmonic ``k = j + 1`` (amplitude 2..3) and a
    weaker one (0.5..1) at the next index, so the fitted trajectories and
    their derivatives are not close to collinear. ``sigma_rel`` sets each
    sector's noise as a fraction of its noiseless standard deviation.
    """
    if n + 1 > (N - 1) // 2:
        raise InadmissibleK(n + 1, N)
    sectors = []
    t = np.arange(1, N + 1, dtype=float)
    for j in range(n):
        harmonics = []
        for k, amp in ((j + 1, rng.uniform(2.0, 3.0)), ((j + 1) % (n + 1) + 1, rng.uniform(0.5, 1.0))):
            phi = rng.uniform(0, 2 * np.pi)
            harmonics.append((k, amp * np.cos(phi), amp * np.sin(phi)))
        s = SectorSpec(f"S{j + 1}", float(rng.uniform(5, 20)), float(rng.uniform(-0.1, 0.1)),
                       tuple(harmonics))
        sd = float(np.std(evaluate(s.model(N), t)))
        sectors.append(SectorSpec(s.name, s.x_bar, s.b, s.harmonics, sigma_rel * sd))
    P = np.eye(n) - rng.uniform(0.0, 0.3, (n, n)) / n
    B = np.diag(rng.uniform(1.0, 3.0, n)) + rng.uniform(-0.2, 0.2, (n, n)) / n
    return GeneratorSpec(N, tuple(sectors), seed, None, 1,
                         tuple(map(tuple, P)), tuple(map(tuple, B)))
