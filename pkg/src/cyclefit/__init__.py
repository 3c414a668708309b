"""Cycle identification for multi-sector macroeconomic panels.

Fits linear-trend-plus-harmonic models on the exact Fourier grid, selects
significant harmonics and the cycle period, identifies dynamic Leontief
matrices and forecasts or simulates the resulting system.
"""

from .diagnostics import FitDiagnostics, diagnose, harmonic_shares, r2_fluct, r2_overall, r2_trend
from .forecast import ForecastResult, PhaseSchedule, forecast, holdout_evaluate, phase_schedule
from .harmonic import (
    FitResult,
    FrequencySpectrum,
    HarmonicTerm,
    HarmonicTrendModel,
    compare_estimators,
    evaluate,
    evaluate_derivative,
    fit_closed_form,
    fit_normal_equations,
    rss,
    spectrum,
)
from .leontief import (
    ControlModel,
    LeontiefSystem,
    check_regulator_totals,
    identify_system,
    reconstruct_control,
    simulate,
)
from .panel import (
    Panel,
    SectorSeries,
    TimeGrid,
    aggregate_sectors,
    aggregate_total,
    load_panel,
    normalize,
    write_panel,
)
from .selection import (
    PeriodSearchResult,
    SignificanceReport,
    phase_dimension,
    prune_insignificant,
    select_period,
    t_statistics,
)
from .synth import GeneratorSpec, SectorSpec, generate_panel

__all__ = [
    "FitDiagnostics", "diagnose", "harmonic_shares", "r2_fluct", "r2_overall", "r2_trend",
    "ForecastResult", "PhaseSchedule", "forecast", "holdout_evaluate", "phase_schedule",
    "FitResult", "FrequencySpectrum", "HarmonicTerm", "HarmonicTrendModel",
    "compare_estimators", "evaluate", "evaluate_derivative", "fit_closed_form",
    "fit_normal_equations", "rss", "spectrum", "ControlModel", "LeontiefSystem",
    "check_regulator_totals", "identify_system", "reconstruct_control", "simulate", "Panel",
    "SectorSeries", "TimeGrid", "aggregate_sectors", "aggregate_total", "load_panel",
    "normalize", "write_panel", "PeriodSearchResult", "SignificanceReport", "phase_dimension",
    "prune_insignificant", "select_period", "t_statistics", "GeneratorSpec", "SectorSpec",
    "generate_panel",
]

__version__ = "0.1.0"
