import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cyclefit.diagnostics import (
    diagnose,
    harmonic_shares,
    harmonic_shares_from_fluct,
    r2_fluct,
    r2_overall,
    r2_trend,
    rss_identity_gap,
)
from cyclefit.errors import ConstantSeries, ZeroFluctuation
from cyclefit.harmonic import fit_closed_form, fit_normal_equations, spectrum
from cyclefit.selection import prune_insignificant

from conftest import harmonic_series, polar_terms


def test_r2_trend_examples():
    t = np.arange(1, 51)
    fit = fit_normal_equations(1 + 2 * t, spectrum(50, {1}))
    assert r2_trend(fit) == pytest.approx(1.0, abs=1e-9)
    pure = fit_normal_equations(3 * np.cos(2 * np.pi * 2 * t / 50), spectrum(50, {2}))
    assert abs(r2_trend(pure)) < 1e-20


def test_r2_trend_formula(rng):
    x = harmonic_series(40, 5, 0.4, [(1, 1, 0.5)], 0.3, rng)
    fit = fit_normal_equations(x, spectrum(40, {1}))
    expect = fit.model.b_slope ** 2 * (40 ** 2 - 1) / 12 * 40 / np.sum((x - x.mean()) ** 2)
    assert r2_trend(fit) == pytest.approx(expect, rel=1e-14)


def test_r2_trend_bounded_for_trend_only_fits(rng):
    for _ in range(20):
        x = harmonic_series(50, 5, rng.uniform(-1, 1), polar_terms(rng, (1, 3), 1.0), 0.5, rng)
        fit, _ = prune_insignificant(x, set())
        assert 0 <= r2_trend(fit) <= 1


def test_r2_trend_can_exceed_one_with_strong_sine():
    # the joint slope is not the simple-regression slope: sum (t - t_bar) sin w t != 0
    t = np.arange(1, 51)
    x = t + 8 * np.sin(2 * np.pi * t / 50)
    fit = fit_normal_equations(x, spectrum(50, {1}))
    assert r2_trend(fit) > 1


def test_r2_overall_examples(rng):
    t = np.arange(1, 51)
    x = 2 + 0.1 * t + np.sin(2 * np.pi * 3 * t / 50)
    assert r2_overall(fit_normal_equations(x, spectrum(50, {3}))) == pytest.approx(1.0, abs=1e-12)
    y = 2 + 0.3 * t + 0.2 * rng.standard_normal(50)
    fit, _ = prune_insignificant(y, set())
    assert r2_overall(fit) == pytest.approx(r2_trend(fit), rel=1e-12)


def test_r2_fluct_examples():
    t = np.arange(1, 51)
    pure = fit_normal_equations(3 * np.cos(2 * np.pi * 2 * t / 50) + 1, spectrum(50, {2}))
    assert r2_fluct(pure) == pytest.approx(1.0, abs=1e-8)
    exact_trend = fit_normal_equations(1 + 2 * t, spectrum(50, {1}))
    with pytest.raises(ZeroFluctuation):
        r2_fluct(exact_trend)
    rng = np.random.default_rng(0)
    noisy_trend, _ = prune_insignificant(1 + 2 * t + 0.1 * rng.standard_normal(50), set())
    assert r2_fluct(noisy_trend) == 0.0


def test_constant_series_raises():
    fit = fit_normal_equations(np.full(20, 3.0), spectrum(20, {1}))
    with pytest.raises(ConstantSeries):
        r2_trend(fit)
    with pytest.raises(ConstantSeries):
        r2_overall(fit)


def test_harmonic_shares_examples(rng):
    x = harmonic_series(50, 1, 0.1, [(4, 1.0, 1.0)], 0.2, rng)
    fit = fit_normal_equations(x, spectrum(50, {4}))
    assert harmonic_shares(fit)[4] == r2_fluct(fit)
    # two equal-amplitude harmonics on noiseless data
    t = np.arange(1, 51)
    x2 = np.cos(2 * np.pi * t / 50) + np.sin(2 * np.pi * 5 * t / 50)
    sh = harmonic_shares(fit_normal_equations(x2, spectrum(50, {1, 5})))
    assert sh[1] == pytest.approx(sh[5], abs=1e-9)
    assert sh[1] == pytest.approx(0.5, abs=1e-9)


def test_both_share_forms_agree(rng):
    x = harmonic_series(50, 3, 0.2, polar_terms(rng, (1, 2, 6), 1.0), 0.3, rng)
    fit = fit_normal_equations(x, spectrum(50, {1, 2, 6, 9}))
    a, b = harmonic_shares(fit), harmonic_shares_from_fluct(fit)
    for k in a:
        assert a[k] == pytest.approx(b[k], abs=1e-12)


def test_exact_spectrum_noiseless_unity(rng):
    x = harmonic_series(60, 2, 0.05, polar_terms(rng, (1, 2, 3), 1.5))
    fit = fit_normal_equations(x, spectrum(60, {1, 2, 3}))
    d = diagnose(fit)
    assert d.r2_overall == pytest.approx(1, abs=1e-8)
    assert d.r2_fluct == pytest.approx(1, abs=1e-8)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31), st.sampled_from([24, 50, 100]))
def test_additivity_and_scale_invariance(seed, N):
    rng = np.random.default_rng(seed)
    ks = tuple(sorted(rng.choice(np.arange(1, 8), size=rng.integers(1, 4), replace=False)))
    x = harmonic_series(N, rng.uniform(-5, 5), rng.uniform(-0.2, 0.2), polar_terms(rng, ks, 1.0),
                        0.3, rng)
    for fitter in (fit_normal_equations, fit_closed_form):
        base = diagnose(fitter(x, spectrum(N, ks)))
        assert abs(base.shares_total - base.r2_fluct) <= 1e-12
        for lam in (1e-3, 1.0, 1e3):
            d = diagnose(fitter(lam * x, spectrum(N, ks)))
            for a, b in ((d.r2_trend, base.r2_trend), (d.r2_overall, base.r2_overall),
                         (d.r2_fluct, base.r2_fluct)):
                assert a == pytest.approx(b, abs=1e-10)
            for k in ks:
                assert d.harmonic_shares[k] == pytest.approx(base.harmonic_shares[k], abs=1e-10)


def test_overall_at_least_trend_for_normal_equations(rng):
    for _ in range(20):
        x = harmonic_series(50, 3, rng.uniform(-1, 1), polar_terms(rng, (1, 2), 0.7), 0.4, rng)
        trend_only, _ = prune_insignificant(x, set())
        full = fit_normal_equations(x, spectrum(50, {1, 2}))
        assert r2_overall(full) >= r2_overall(trend_only) - 1e-12


def test_rss_identity_gap_small(rng):
    x = harmonic_series(50, 3, 0.3, polar_terms(rng, (2, 5), 1.0), 0.5, rng)
    assert rss_identity_gap(fit_normal_equations(x, spectrum(50, {2, 5}))) < 1e-8


def test_diagnose_nan_without_fluctuation():
    t = np.arange(1, 31)
    d = diagnose(fit_normal_equations(1.0 + t, spectrum(30, {2})))
    assert math.isnan(d.r2_fluct) and math.isnan(d.harmonic_shares[2])
    assert d.r2_trend == pytest.approx(1.0)
