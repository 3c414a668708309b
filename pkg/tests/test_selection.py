import numpy as np
import pytest

from cyclefit.errors import EmptyRange, NoCovariance, WindowTooLong, ZeroDofResidual
from cyclefit.harmonic import (
    FitResult,
    FrequencySpectrum,
    HarmonicTerm,
    HarmonicTrendModel,
    fit_closed_form,
    fit_normal_equations,
    spectrum,
)
from cyclefit.selection import (
    CoefficientTest,
    SignificanceReport,
    _p_value,
    default_holdback,
    default_k_max_rule,
    phase_dimension,
    prune_insignificant,
    select_period,
    t_statistics,
)

from conftest import harmonic_series, polar_terms


def test_zero_estimate_is_insignificant():
    t, p = _p_value(0.0, 0.3, 10)
    assert t == 0.0 and p == 1.0
    t, p = _p_value(2.0, 0.0, 10)
    assert p == 0.0 and t == np.inf


def test_t_stat_matches_definition(rng):
    x = harmonic_series(50, 3, 0.1, [(1, 2, 1)], 0.2, rng)
    fit = fit_normal_equations(x, spectrum(50, {1, 4}))
    rep = t_statistics(fit, 0.005)
    assert rep.dof == 50 - 5
    se = np.sqrt(np.diag(fit.covariance))
    for e, est, s in zip(rep.entries, fit.model.coefficients(), se):
        assert e.t_stat == pytest.approx(est / s)
        assert 0 <= e.p_value <= 1
    assert rep.harmonic_p(1) < 1e-10
    assert rep.entry("a_1").kept and rep.entry("b_1").kept


def test_noiseless_harmonic_kept():
    t = np.arange(1, 51)
    x = 5 * np.sin(2 * np.pi * 3 * t / 50) + 1e-9 * np.cos(2 * np.pi * 7 * t / 50)
    rep = t_statistics(fit_normal_equations(x, spectrum(50, {3})), 0.005)
    assert rep.entry("b_3").std_error < 1e-9
    assert rep.significant_k == (3,)


def test_pair_rule_keeps_pure_sine():
    t = np.arange(1, 51)
    rng = np.random.default_rng(0)
    x = 2 * np.sin(2 * np.pi * t / 50) + 0.1 * rng.standard_normal(50)
    rep = t_statistics(fit_normal_equations(x, spectrum(50, {1})), 0.005)
    assert rep.entry("a_1").p_value > 0.005 or abs(rep.entry("a_1").estimate) < 0.1
    assert rep.entry("a_1").kept and 1 in rep.significant_k


def test_t_statistics_errors(rng):
    x = harmonic_series(12, 1, 0.2, [(1, 1, 0)], 0.1, rng)
    with pytest.raises(NoCovariance):
        t_statistics(fit_closed_form(x, spectrum(12, {1})))
    # p = N is rank deficient on the exact grid, so build the saturated fit by hand
    model = HarmonicTrendModel(0.0, 1.0, (HarmonicTerm(1, 1, 0), HarmonicTerm(2, 0, 1)), 5)
    z = np.zeros(5)
    with pytest.raises(ZeroDofResidual):
        t_statistics(FitResult(model, z, z, z, np.eye(5)))


def test_selection_power_small(rng):
    hits = spurious = 0
    for _ in range(40):
        x = harmonic_series(50, 10, 0.2, polar_terms(rng, (1, 3), 2.0), 0.1, rng)
        _, rep = prune_insignificant(x, {1, 3, 5})
        hits += rep.significant_k == (1, 3)
        spurious += 5 in rep.significant_k
    assert hits >= 37 and spurious <= 3


def test_trend_only_pruned_to_empty():
    empty = 0
    for seed in range(100):
        rng = np.random.default_rng(seed)
        x = harmonic_series(50, 2, 0.3, (), 0.05, rng)
        fit, rep = prune_insignificant(x, {1, 2, 3})
        empty += fit.model.ks == ()
    assert empty >= 90


def test_four_harmonic_structure_selected():
    rng = np.random.default_rng(11)
    x = harmonic_series(50, 20, 0.5, polar_terms(rng, (1, 2, 3, 6), 3.0), 0.2, rng)
    fit, rep = prune_insignificant(x, range(1, 13))
    assert fit.model.ks == (1, 2, 3, 6)
    assert set(rep.dropped_k) == set(range(1, 13)) - {1, 2, 3, 6}
    assert phase_dimension(rep) == 5


def test_empty_initial_set(rng):
    x = harmonic_series(30, 1, 0.1, (), 0.1, rng)
    fit, rep = prune_insignificant(x, set())
    assert fit.model.terms == () and rep.entries == () and rep.dropped_k == ()


def test_elimination_invariants():
    rng = np.random.default_rng(5)
    x = harmonic_series(60, 5, 0.1, [(2, 1.5, 0.5)], 0.3, rng)
    initial = set(range(1, 9))
    fit, rep = prune_insignificant(x, initial)
    assert set(fit.model.ks) <= initial
    assert set(fit.model.ks).isdisjoint(rep.dropped_k)
    assert len(fit.model.ks) + len(rep.dropped_k) == len(initial)
    # each dropped harmonic was the least significant at its step
    ks = sorted(initial)
    for k in rep.dropped_k:
        r = t_statistics(fit_normal_equations(x, FrequencySpectrum(60, tuple(ks))))
        worst = max(ks, key=r.harmonic_p)
        assert worst == k and r.harmonic_p(k) > rep.alpha
        ks.remove(k)
    # fixed point
    fit2, rep2 = prune_insignificant(x, fit.model.ks)
    assert fit2.model.ks == fit.model.ks and rep2.dropped_k == ()
    assert all(e.kept for e in rep.entries)


def test_default_rules():
    assert default_holdback(50) == 5 and default_holdback(30) == 4 and default_holdback(70) == 7
    assert default_k_max_rule(50) == 6
    assert default_k_max_rule(50, 12) == 12
    assert default_k_max_rule(8, 12) == 1
    for T in range(4, 120):
        k = default_k_max_rule(T, 40)
        assert 2 * k < T and T - 1 - 2 * k >= max(4, T // 4) or k == 0


def _period_series(seed, scale=1.0, length=80):
    rng = np.random.default_rng(seed)
    amps = (2.0, 1.5, 1.0, 0.5)
    terms = []
    for k, c in zip((1, 2, 3, 6), amps):
        phi = rng.uniform(0, 2 * np.pi)
        terms.append((k, c * np.cos(phi), c * np.sin(phi)))
    x = harmonic_series(50, 10.0, 0.05, terms, 0.02 * max(amps), rng, length=length)
    return scale * x


def test_select_period_recovers_50():
    for seed in range(5):
        res = select_period(_period_series(seed), range(30, 71), holdback=10)
        assert res.chosen_T == 50
        assert res.holdback_length == 10
        assert [T for T, _ in res.candidates] == list(range(30, 71))
        assert min(s for _, s in res.candidates) == dict(res.candidates)[50]


def test_select_period_linear_tie():
    x = 3.0 + 0.7 * np.arange(1, 81)
    res = select_period(x, range(30, 71), holdback=10)
    assert res.chosen_T == 30
    assert max(s for _, s in res.candidates) < 1e-9


def test_select_period_scale_and_affine_invariance():
    x = _period_series(2)
    base = select_period(x, range(40, 61), holdback=10)
    for lam in (1e-3, 7.0, 1e3):
        assert select_period(lam * x, range(40, 61), holdback=10).chosen_T == base.chosen_T
    # calendar labels never enter: the index-only input gives the same answer
    assert select_period(list(x), range(40, 61), holdback=10).chosen_T == base.chosen_T


def test_select_period_single_candidate():
    res = select_period(_period_series(1), [50], holdback=10)
    assert res.chosen_T == 50 and len(res.candidates) == 1


def test_select_period_errors():
    x = np.arange(60.0)
    with pytest.raises(WindowTooLong):
        select_period(x, range(30, 71), holdback=10)
    with pytest.raises(EmptyRange):
        select_period(x, [], holdback=10)


def test_phase_dimension_examples():
    def rep(ks):
        entries = [CoefficientTest("b", 1, 1, 1, 0.0, True)]
        for k in ks:
            entries += [CoefficientTest(f"a_{k}", 1, 0.1, 10, 0.0, True),
                        CoefficientTest(f"b_{k}", 0, 0.1, 0, 1.0, True)]
        return SignificanceReport(0.005, tuple(entries))
    assert phase_dimension([rep((1, 2, 3, 6))]) == 5
    assert phase_dimension([rep(())]) == 1
    assert phase_dimension(rep((1,))) == 2
    with pytest.raises(ValueError):
        phase_dimension([])
