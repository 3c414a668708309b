"""JSON/CSV emission of fits, diagnostics tables, curves and Leontief systems.

Floats are written with ``repr`` (shortest round-trip form), so every double
reads back bit-identical; non-finite values become ``null``.
"""

from __future__ import annotations

import csv
import io
import json
import math
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Sequence

import numpy as np

from .diagnostics import FitDiagnostics
from .forecast import ForecastResult, PhaseSchedule
from .harmonic import FitResult, HarmonicTerm, HarmonicTrendModel, evaluate, rss
from .leontief import LeontiefSystem, RegulatorReport, SimulationResult
from .selection import PeriodSearchResult, SignificanceReport

MISSING = "---"
WAVE_LABELS = {1: "Kondratieff", 2: "half-Kondratieff", 3: "Kuznets", 6: "Juglar"}


def _num(v):
    if v is None:
        return None
    v = float(v)
    return v if math.isfinite(v) else None


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _num(obj)
    return obj


def dumps(obj) -> str:
    return json.dumps(_clean(obj), indent=2, allow_nan=False) + "\n"


def write_json(path, obj) -> Path:
    path = Path(path)
    path.write_text(dumps(obj), encoding="utf-8")
    return path


def model_to_dict(model: HarmonicTrendModel) -> dict:
    return {
        "N": model.N,
        "estimator": model.estimator,
        "x_bar": model.x_bar,
        "b_slope": model.b_slope,
        "terms": [{"k": h.k, "a": h.a, "b": h.b, "c": h.c} for h in model.terms],
    }


def model_from_dict(d: dict) -> HarmonicTrendModel:
    return HarmonicTrendModel(d["x_bar"], d["b_slope"],
                              tuple(HarmonicTerm(t["k"], t["a"], t["b"]) for t in d["terms"]),
                              d["N"], d.get("estimator", "normal_equations"))


def fit_to_dict(fit: FitResult, sector: str | None = None) -> dict:
    S, formula = rss(fit)
    d = {"sector": sector if sector is not None else fit.sector}
    d.update(model_to_dict(fit.model))
    d["rss"] = S
    d["min_s_formula"] = formula
    d["discrepancy"] = [
        {"coef": r.coef, "closed_form": r.closed_form, "normal_eq": r.normal_eq,
         "rel_diff": r.rel_diff, "deviates": r.deviates}
        for r in fit.discrepancy
    ]
    return d


def significance_to_dict(report: SignificanceReport, sector: str = "") -> dict:
    return {
        "sector": sector,
        "alpha": report.alpha,
        "dof": report.dof,
        "entries": [
            {"name": e.name, "estimate": e.estimate, "std_error": e.std_error,
             "t_stat": e.t_stat, "p_value": e.p_value, "kept": e.kept}
            for e in report.entries
        ],
        "kept_k": list(report.significant_k),
        "dropped_k": list(report.dropped_k),
    }


def period_to_dict(result: PeriodSearchResult, sector: str = "TOTAL") -> dict:
    return {
        "sector": sector,
        "chosen_T": result.chosen_T,
        "holdback": result.holdback_length,
        "candidates": [{"T": T, "backcast_rmse": s, "kept_k": list(result.kept_k.get(T, ()))}
                       for T, s in result.candidates],
    }


def system_to_dict(system: LeontiefSystem) -> dict:
    return {
        "n": system.n,
        "sectors": list(system.sectors),
        "P": system.P,
        "B": system.B,
        "x_star": system.x_star,
        "t_star": system.t_star,
        "condition_number_B": system.condition_number_B,
        "u_bar": system.u_bar,
        "x_bar": system.x_bar,
        "feasibility": system.feasibility(),
    }


def system_from_dict(d: dict) -> LeontiefSystem:
    """Inverse of :func:`system_to_dict`.

    ``u_bar`` and ``x_bar`` are optional; without them the boundary state is
    taken as the operating point and ``u_bar = P x_star`` (equilibrium).
    """
    P = np.asarray(d["P"], dtype=float)
    x_star = np.asarray(d["x_star"], dtype=float)
    u_bar = d.get("u_bar")
    x_bar = d.get("x_bar")
    return LeontiefSystem(
        P, np.asarray(d["B"], dtype=float),
        P @ x_star if u_bar is None else u_bar,
        x_star if x_bar is None else x_bar,
        float(d["t_star"]), x_star, tuple(d.get("sectors") or ()))


def regulator_to_dict(rep: RegulatorReport) -> dict:
    return {"x_max_gap": rep.x_max_gap, "x_rms_gap": rep.x_rms_gap,
            "u_max_gap": rep.u_max_gap, "u_rms_gap": rep.u_rms_gap}


def forecast_to_dict(res: ForecastResult, sector: str = "", t0_label: int | None = None) -> dict:
    pts = []
    for i, (t, v) in enumerate(zip(res.t, res.value)):
        p = {"t": t, "value": v}
        if t0_label is not None:
            p["year"] = int(round(t0_label + t - 1))
        if res.observed is not None:
            p["observed"] = res.observed[i]
        pts.append(p)
    return {"sector": sector, "points": pts, "mae": res.mae, "rmse": res.rmse,
            "mape": res.mape, "mape_undefined": res.mape_undefined}


def schedule_to_dict(s: PhaseSchedule, sector: str = "") -> dict:
    return {
        "sector": sector,
        "interval": [s.t_a, s.t_b],
        "harmonics": [
            {"k": k, "label": WAVE_LABELS.get(k, ""),
             "turns": [{"t": p.t, "year": p.year, "direction": p.direction} for p in pts]}
            for k, pts in sorted(s.turns.items())
        ],
    }


def simulation_to_dict(sim: SimulationResult, sectors: Sequence[str]) -> dict:
    return {"t0": sim.t0, "tf": sim.tf, "h": sim.h, "method": sim.method,
            "sectors": list(sectors), "t": sim.t, "x": sim.x}


# -- tables ------------------------------------------------------------------

def diagnostics_tables(diags: dict) -> dict:
    """Trend R2, harmonic shares and overall R2 per sector, ``TOTAL`` last.

    ``diags`` maps sector name to :class:`FitDiagnostics`; a harmonic absent
    from a sector's model is shown as ``---``.
    """
    ks = sorted({k for d in diags.values() for k in d.harmonic_shares})
    shares = []
    for name, d in diags.items():
        row = {"sector": name}
        for k in ks:
            row[f"k={k}"] = d.harmonic_shares.get(k, MISSING)
        row["sum"] = d.r2_fluct
        shares.append(row)
    return {
        "trend_r2": [{"sector": n, "r2": d.r2_trend} for n, d in diags.items()],
        "harmonic_shares": {"ks": ks, "rows": shares},
        "overall_r2": [{"sector": n, "r2": d.r2_overall} for n, d in diags.items()],
    }


def _fmt(v):
    if isinstance(v, str):
        return v
    if v is None or (isinstance(v, float) and not math.isfinite(v)):
        return ""
    return repr(float(v))


def tables_to_csv(tables: dict) -> dict:
    """Render :func:`diagnostics_tables` output as three CSV strings."""
    out = {}
    for key in ("trend_r2", "overall_r2"):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["sector", "r2"])
        for row in tables[key]:
            w.writerow([row["sector"], _fmt(row["r2"])])
        out[key] = buf.getvalue()
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    ks = tables["harmonic_shares"]["ks"]
    w.writerow(["sector", *(f"k={k}" for k in ks), "sum"])
    for row in tables["harmonic_shares"]["rows"]:
        w.writerow([row["sector"], *(_fmt(row[f"k={k}"]) for k in ks), _fmt(row["sum"])])
    out["harmonic_shares"] = buf.getvalue()
    return out


def diagnostics_to_dict(d: FitDiagnostics) -> dict:
    return {"r2_trend": d.r2_trend, "r2_overall": d.r2_overall, "r2_fluct": d.r2_fluct,
            "harmonic_shares": {str(k): v for k, v in sorted(d.harmonic_shares.items())}}


def curve_csv(model: HarmonicTrendModel, t0_label: int, t: np.ndarray,
              observed: dict | None = None) -> str:
    """Curve samples ``t, year, value, observed`` (blank when no observation)."""
    observed = observed or {}
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "year", "value", "observed"])
    for ti, v in zip(t, np.atleast_1d(evaluate(model, t))):
        obs = observed.get(int(ti)) if float(ti).is_integer() else None
        w.writerow([_fmt(ti), _fmt(t0_label + ti - 1), _fmt(v), "" if obs is None else _fmt(obs)])
    return buf.getvalue()


def harmonic_curves_csv(model: HarmonicTrendModel, t0_label: int, t: np.ndarray) -> str:
    """Individual harmonic waves, one column per ``k``."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "year", *(f"k={k}" for k in model.ks)])
    waves = [np.atleast_1d(model.harmonic(k, t)) for k in model.ks]
    for i, ti in enumerate(t):
        w.writerow([_fmt(ti), _fmt(t0_label + ti - 1), *(_fmt(wv[i]) for wv in waves)])
    return buf.getvalue()


# -- schemas -----------------------------------------------------------------

@lru_cache(maxsize=None)
def load_schema(name: str) -> dict:
    text = resources.files("cyclefit").joinpath("schemas", f"{name}.json").read_text("utf-8")
    return json.loads(text)


def validate(obj, name: str) -> None:
    """Validate ``obj`` (already JSON-clean) against a bundled schema."""
    import jsonschema
    jsonschema.validate(obj, load_schema(name))
