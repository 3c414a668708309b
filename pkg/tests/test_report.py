import json
import math

import numpy as np
import pytest

from cyclefit import report as rp
from cyclefit.diagnostics import diagnose
from cyclefit.forecast import forecast, phase_schedule
from cyclefit.harmonic import HarmonicTrendModel, compare_estimators, fit_normal_equations, spectrum
from cyclefit.leontief import LeontiefSystem, check_regulator_totals, simulate
from cyclefit.selection import prune_insignificant, select_period

from conftest import harmonic_series, polar_terms


def _clean(obj):
    return json.loads(rp.dumps(obj))


def test_repr_floats_round_trip():
    vals = [0.1, 1 / 3, 1e-300, -2.5e17, np.float64(np.pi)]
    back = json.loads(rp.dumps({"v": vals}))["v"]
    assert [float(v) for v in vals] == back
    assert json.loads(rp.dumps([math.nan, math.inf, 1.0])) == [None, None, 1.0]


def test_fit_dict_and_schema(rng):
    x = harmonic_series(50, 3, 0.2, polar_terms(rng, (1, 2), 1.0), 0.1, rng)
    ref, _ = compare_estimators(x, spectrum(50, {1, 2}))
    d = _clean(rp.fit_to_dict(ref, "S1"))
    rp.validate(d, "fit")
    assert {"sector", "N", "estimator", "x_bar", "b_slope", "terms", "rss", "min_s_formula",
            "discrepancy"} <= set(d)
    assert [t["k"] for t in d["terms"]] == [1, 2]
    assert {"coef", "closed_form", "normal_eq", "rel_diff"} <= set(d["discrepancy"][0])
    m = rp.model_from_dict(d)
    assert m == ref.model


def test_system_round_trip():
    s = LeontiefSystem([[0.9, -0.1], [0.0, 0.8]], [[2.0, 0.1], [0.0, 1.5]], [1.0, 2.0],
                       [3.0, 4.0], 51.0, [5.0, 6.0], ("a", "b"))
    d = _clean(rp.system_to_dict(s))
    rp.validate(d, "leontief")
    assert {"n", "sectors", "P", "B", "x_star", "t_star", "condition_number_B"} <= set(d)
    back = rp.system_from_dict(d)
    for f in ("P", "B", "u_bar", "x_bar", "x_star"):
        np.testing.assert_array_equal(getattr(back, f), getattr(s, f))
    minimal = rp.system_from_dict({k: d[k] for k in ("P", "B", "x_star", "t_star")})
    np.testing.assert_allclose(minimal.u_bar, minimal.P @ minimal.x_star)


def test_all_artifact_schemas(rng):
    x = harmonic_series(50, 3, 0.2, polar_terms(rng, (1, 3), 2.0), 0.1, rng, length=80)
    fit, rep = prune_insignificant(x[:50], range(1, 7))
    rp.validate(_clean({"alpha": 0.005, "sectors": [rp.significance_to_dict(rep, "S1")]}),
                "significance")
    per = select_period(x, range(40, 61), holdback=10)
    rp.validate(_clean(rp.period_to_dict(per)), "period")
    fc = forecast(fit.model, 2, x[50:52])
    rp.validate(_clean({"horizon": 2, "sectors": [rp.forecast_to_dict(fc, "S1", 1966)]}),
                "forecast")
    sched = phase_schedule(fit.model, (35, 80), 1966)
    rp.validate(_clean(rp.schedule_to_dict(sched, "TOTAL")), "schedule")
    reg = check_regulator_totals([fit.model], fit.model, [fit.model], x[:50])
    rp.validate(_clean(rp.regulator_to_dict(reg)), "regulator")
    s = LeontiefSystem([[1.0]], [[1.0]], [0.0], [0.0], 0.0, [1.0])
    sim = simulate(s, lambda t: np.zeros(1), (0.0, 1.0), h=0.1)
    rp.validate(_clean(rp.simulation_to_dict(sim, ["a"])), "simulation")


def test_schema_rejects_bad_fit():
    import jsonschema
    with pytest.raises(jsonschema.ValidationError):
        rp.validate({"sector": "x"}, "fit")


def test_tables_missing_marker_and_csv(rng):
    a = fit_normal_equations(harmonic_series(50, 3, 0.2, [(1, 2, 0), (2, 0, 1)], 0.1, rng),
                             spectrum(50, {1, 2}))
    b = fit_normal_equations(harmonic_series(50, 3, 0.2, [(1, 2, 0)], 0.1, rng), spectrum(50, {1}))
    tables = rp.diagnostics_tables({"S1": diagnose(a), "S2": diagnose(b)})
    assert tables["harmonic_shares"]["ks"] == [1, 2]
    row2 = tables["harmonic_shares"]["rows"][1]
    assert row2["k=2"] == rp.MISSING
    csvs = rp.tables_to_csv(tables)
    lines = csvs["harmonic_shares"].splitlines()
    assert lines[0] == "sector,k=1,k=2,sum"
    assert lines[2].split(",")[2] == "---"
    assert csvs["trend_r2"].splitlines()[0] == "sector,r2"


def test_curve_csv():
    m = HarmonicTrendModel(2.0, 0.5, (), 10)
    text = rp.curve_csv(m, 2000, np.array([1.0, 1.5, 11.0]), {1: 2.25})
    rows = [r.split(",") for r in text.splitlines()]
    assert rows[0] == ["t", "year", "value", "observed"]
    assert rows[1] == ["1.0", "2000.0", repr(2.0 + 0.5 * (1 - 5.5)), "2.25"]
    assert rows[2][3] == "" and rows[3][1] == "2010.0"
