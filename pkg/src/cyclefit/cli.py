"""``cyclefit`` command line.

Every command works on a study directory (``--out``) and recomputes what it
needs from the input CSVs, so commands can run in any order. Flags override
values from ``--config``. Exit codes: 0 success, 2 bad input, 3 numerical
failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import report as rp
from .diagnostics import diagnose
from .errors import CycleFitError, InputError, NumericalError
from .forecast import forecast, phase_schedule
from .harmonic import HarmonicTerm, HarmonicTrendModel, compare_estimators
from .leontief import check_regulator_totals, identify_system, simulate
from .panel import Panel, aggregate_sectors, aggregate_total, load_panel, normalize, write_panel
from .selection import (
    DEFAULT_ALPHA,
    default_k_max_rule,
    phase_dimension,
    prune_insignificant,
    select_period,
)
from .synth import GeneratorSpec, SectorSpec, generate_panel

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 2, 3


@dataclass
class StudyConfig:
    outputs: str | None = None
    consumption: str | None = None
    normalize: bool = True
    T: int | None = None
    t_range: list | None = None          # [lo, hi] inclusive
    holdback: int | None = None
    k_max: int = 12
    alpha: float = DEFAULT_ALPHA
    holdout: int = 2
    grouping: dict | None = None
    out: str = "study"
    emit: list = field(default_factory=lambda: ["json", "csv"])
    step: float = 0.01
    system: str | None = None
    t0: float | None = None
    tf: float | None = None

    def validate(self):
        if not 0 < self.alpha < 1:
            raise InputError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.holdout < 0:
            raise InputError("holdout must be non-negative")
        if self.k_max < 0:
            raise InputError("k_max must be non-negative")
        if self.t_range is not None:
            lo, hi = self.t_range
            if lo < 4 or hi < lo:
                raise InputError(f"invalid period range {lo}:{hi}")
        if self.T is not None and self.T < 4:
            raise InputError(f"period T={self.T} is too short")
        if self.step <= 0:
            raise InputError("step must be positive")
        return self


def _parse_range(text: str):
    try:
        lo, hi = text.split(":")
        return [int(lo), int(hi)]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected LO:HI, got {text!r}") from None


def load_config(args) -> StudyConfig:
    cfg = {}
    if args.config:
        path = Path(args.config)
        if not path.exists():
            raise InputError(f"config file not found: {path}")
        try:
            cfg = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise InputError(f"{path}: invalid JSON ({exc})") from None
        known = {f.name for f in dataclasses.fields(StudyConfig)}
        unknown = set(cfg) - known
        if unknown:
            raise InputError(f"{path}: unknown config keys {sorted(unknown)}")
        # relative input paths resolve against the config file's directory
        for key in ("outputs", "consumption", "system"):
            if cfg.get(key) and not Path(cfg[key]).is_absolute():
                cfg[key] = str(path.parent / cfg[key])
    config = StudyConfig(**cfg)
    for f in dataclasses.fields(StudyConfig):
        v = getattr(args, f.name, None)
        if v is not None:
            setattr(config, f.name, v)
    if getattr(args, "grouping_file", None):
        config.grouping = _read_json(args.grouping_file)
    emit = [e for e, on in (("json", args.emit_json), ("csv", args.emit_csv)) if on]
    if emit:
        config.emit = emit
    return config.validate()


def _read_json(path):
    path = Path(path)
    if not path.exists():
        raise InputError(f"file not found: {path}")
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc})") from None


# -- study state -------------------------------------------------------------

@dataclass
class Study:
    config: StudyConfig
    out: Path
    x_raw: Panel
    x: Panel                    # normalized (or raw) outputs, full length
    total_raw: np.ndarray
    total: np.ndarray
    total_scale: float
    u: Panel | None = None      # consumption in the outputs' units
    T: int | None = None
    start: int = 0

    @property
    def L(self):
        return self.x.grid.N

    @property
    def t0_label(self):
        return self.x.grid.t0_label + self.start

    def window(self, values):
        return np.asarray(values)[self.start:self.start + self.T]

    def tail(self, values):
        return np.asarray(values)[self.start + self.T:self.start + self.T + self.config.holdout]


def _load_input(path, kind, what):
    if path is None:
        raise InputError(f"no {what} CSV given")
    p = Path(path)
    if not p.exists():
        raise InputError(f"{what} CSV not found: {p}")
    return load_panel(p, kind)


def open_study(config: StudyConfig, need_consumption: bool = False, need_T: bool = True) -> Study:
    out = Path(config.out)
    x_raw = _load_input(config.outputs, "output", "outputs")
    u_raw = _load_input(config.consumption, "consumption", "consumption") if need_consumption else None
    if config.grouping:
        x_raw = aggregate_sectors(x_raw, config.grouping)
        if u_raw is not None:
            u_raw = aggregate_sectors(u_raw, config.grouping)
    if u_raw is not None:
        if u_raw.names != x_raw.names:
            raise InputError(f"sector sets differ: outputs {x_raw.names}, consumption {u_raw.names}")
        if (u_raw.grid.t0_label, u_raw.grid.N) != (x_raw.grid.t0_label, x_raw.grid.N):
            raise InputError("outputs and consumption cover different year ranges")

    total_raw = aggregate_total(x_raw).values
    if config.normalize:
        x = normalize(x_raw)
        divisors = [s.values[0] for s in x_raw.series]
        u = normalize(u_raw, divisors) if u_raw is not None else None
        if total_raw[0] == 0:
            raise InputError("TOTAL output is zero in the first year; cannot normalize")
        total_scale = float(total_raw[0])
    else:
        x, u, total_scale = x_raw, u_raw, 1.0
    study = Study(config, out, x_raw, x, total_raw, total_raw / total_scale, total_scale, u)

    T = config.T
    if T is None and (out / "period.json").exists():
        T = int(_read_json(out / "period.json")["chosen_T"])
    if T is None and need_T:
        raise InputError("no period: pass --T, or run select-period first")
    if T is not None:
        start = study.L - config.holdout - T
        if start < 0:
            raise InputError(f"T={T} plus holdout {config.holdout} exceeds {study.L} samples")
        study.T, study.start = T, start
    return study


def _candidates(config, N):
    return range(1, default_k_max_rule(N, config.k_max) + 1)


def fit_series(study: Study, values, name: str):
    """Prune on the window, then re-fit with the cross-check report attached."""
    w = study.window(values)
    fit, report = prune_insignificant(w, _candidates(study.config, study.T), study.config.alpha)
    full, _ = compare_estimators(w, fit.model.spectrum)
    full = dataclasses.replace(full, sector=name)
    return full, report


def fit_all(study: Study) -> dict:
    fits = {}
    for s in study.x.series:
        fits[s.name] = fit_series(study, s.values, s.name)
    fits["TOTAL"] = fit_series(study, study.total, "TOTAL")
    return fits


def scale_model(model: HarmonicTrendModel, s: float) -> HarmonicTrendModel:
    return HarmonicTrendModel(model.x_bar * s, model.b_slope * s,
                              tuple(HarmonicTerm(h.k, h.a * s, h.b * s) for h in model.terms),
                              model.N, model.estimator)


class Writer:
    """Collects artifacts under the study directory."""

    def __init__(self, root: Path, emit):
        self.root = Path(root)
        self.emit = set(emit)
        self.root.mkdir(parents=True, exist_ok=True)

    def json(self, rel, obj, schema=None):
        if "json" not in self.emit:
            return
        clean = json.loads(rp.dumps(obj))
        if schema:
            rp.validate(clean, schema)
        p = self.root / rel
        p.parent.mkdir(parents=True, exist_ok=True)
        rp.write_json(p, obj)

    def csv(self, rel, text):
        if "csv" not in self.emit:
            return
        p = self.root / rel
        p.parent.mkdir(parents=True, exist_ok=True)
        p.write_text(text, encoding="utf-8")


def _say(msg):
    print(msg)


# -- commands ----------------------------------------------------------------

def cmd_select_period(config: StudyConfig) -> int:
    study = open_study(config, need_T=False)
    if config.t_range is None:
        raise InputError("select-period needs --t-range LO:HI")
    lo, hi = config.t_range
    series = study.total[:study.L - config.holdout]
    res = select_period(series, range(lo, hi + 1), config.holdback, config.k_max, config.alpha)
    # period.json is the hand-off to later stages, so it is always written
    w = Writer(study.out, ["json"])
    w.json("period.json", rp.period_to_dict(res), "period")
    _say(f"chosen_T={res.chosen_T}")
    return EXIT_OK


def cmd_fit(config: StudyConfig) -> int:
    study = open_study(config)
    fits = fit_all(study)
    w = Writer(study.out, config.emit)
    diags, sig = {}, []
    t_curve = np.arange(1, study.T + config.holdout + 1, dtype=float)
    for name, (fit, report) in fits.items():
        w.json(f"fits/{name}.json", rp.fit_to_dict(fit, name), "fit")
        sig.append(rp.significance_to_dict(report, name))
        diags[name] = diagnose(fit)
        values = study.total if name == "TOTAL" else study.x[name].values
        obs_vals = np.concatenate([study.window(values), study.tail(values)])
        observed = {i + 1: float(v) for i, v in enumerate(obs_vals)}
        w.csv(f"curves/{name}.csv", rp.curve_csv(fit.model, study.t0_label, t_curve, observed))
        if fit.model.terms:
            w.csv(f"curves/{name}_harmonics.csv",
                  rp.harmonic_curves_csv(fit.model, study.t0_label, t_curve))
    tables = rp.diagnostics_tables(diags)
    n_dim = phase_dimension(fits["TOTAL"][1])
    w.json("significance.json", {"alpha": config.alpha, "sectors": sig}, "significance")
    w.json("diagnostics.json", {
        "N": study.T, "t0_label": study.t0_label, "phase_dimension": n_dim,
        "sectors": {k: rp.diagnostics_to_dict(d) for k, d in diags.items()},
        "tables": tables}, "diagnostics")
    for key, text in rp.tables_to_csv(tables).items():
        w.csv(f"tables/{key}.csv", text)
    total_fit = fits["TOTAL"][0]
    _say(f"N={study.T} window={study.t0_label}-{study.t0_label + study.T - 1} "
         f"TOTAL harmonics={list(total_fit.model.ks)} phase_dimension={n_dim}")
    for row in tables["harmonic_shares"]["rows"]:
        cells = " ".join(f"{k}:{v if isinstance(v, str) else f'{v:.4f}'}"
                         for k, v in row.items() if k != "sector")
        _say(f"  {row['sector']}: {cells}")
    return EXIT_OK


def _identify(study: Study):
    fits = fit_all(study)
    names = study.x.names
    x_models = [fits[n][0].model for n in names]
    u_window = study.u.window(study.start, study.T)
    system, control = identify_system(x_models, u_window)
    # regulator totals in raw units
    scales = study.x.scale
    raw_x = [scale_model(m, s) for m, s in zip(x_models, scales)]
    raw_u = [scale_model(m, s) for m, s in zip(control.models, scales)]
    total_x = scale_model(fits["TOTAL"][0].model, study.total_scale)
    total_u_obs = u_window.matrix() @ np.asarray(scales)
    regulator = check_regulator_totals(raw_x, total_x, raw_u, total_u_obs, study.T)
    return fits, system, control, regulator


def cmd_identify(config: StudyConfig) -> int:
    study = open_study(config, need_consumption=True)
    fits, system, control, regulator = _identify(study)
    w = Writer(study.out, config.emit)
    w.json("leontief.json", rp.system_to_dict(system), "leontief")
    w.json("regulator.json", rp.regulator_to_dict(regulator), "regulator")
    w.json("control.json", {"sectors": list(system.sectors),
                            "models": [rp.model_to_dict(m) for m in control.models],
                            "regressor_condition": control.regressor_condition,
                            "residual_rms": np.sqrt(np.mean(control.residuals ** 2, axis=0))},
           "control")
    _say(f"identified n={system.n} cond(B)={system.condition_number_B:.3e} "
         f"regulator x_max_gap={regulator.x_max_gap:.3e} u_max_gap={regulator.u_max_gap:.3e}")
    return EXIT_OK


def cmd_forecast(config: StudyConfig) -> int:
    study = open_study(config)
    H = config.holdout
    if H < 1:
        raise InputError("forecast needs --horizon/--holdout >= 1")
    fits = fit_all(study)
    w = Writer(study.out, config.emit)
    results = []
    rows = ["sector,t,year,value,observed"]
    for name, (fit, _) in fits.items():
        values = study.total if name == "TOTAL" else study.x[name].values
        tail = study.tail(values)
        res = forecast(fit.model, H, tail if len(tail) == H else None)
        results.append(rp.forecast_to_dict(res, name, study.t0_label))
        for i, (t, v) in enumerate(zip(res.t, res.value)):
            obs = "" if res.observed is None else repr(float(res.observed[i]))
            rows.append(f"{name},{t!r},{int(study.t0_label + t - 1)},{v!r},{obs}")
    w.json("forecast.json", {"horizon": H, "sectors": results}, "forecast")
    w.csv("forecast.csv", "\n".join(rows) + "\n")
    total_model = fits["TOTAL"][0].model
    if total_model.terms:
        # turning points over the window and one further period
        sched = phase_schedule(total_model, (1, 2 * study.T), study.t0_label)
        w.json("phase_schedule.json", rp.schedule_to_dict(sched, "TOTAL"), "schedule")
    tot = results[-1]
    _say(f"TOTAL forecast {[round(float(p['value']), 6) for p in tot['points']]}"
         + (f" MAPE={tot['mape']:.4f}%" if tot["mape"] is not None else ""))
    return EXIT_OK


def cmd_simulate(config: StudyConfig) -> int:
    w = Writer(config.out, config.emit)
    if config.system:
        system = rp.system_from_dict(_read_json(config.system))
        u_const = system.u_bar.copy()

        def u_fn(t):
            return u_const
        t0 = config.t0 if config.t0 is not None else system.t_star
        tf = config.tf if config.tf is not None else system.t_star + 10.0
    else:
        study = open_study(config, need_consumption=True)
        _, system, control, _ = _identify(study)
        u_fn = control
        t0 = config.t0 if config.t0 is not None else 1.0
        tf = config.tf if config.tf is not None else float(study.T + max(config.holdout, 1))
    sim = simulate(system, u_fn, (t0, tf), config.step)
    w.json("simulation.json", rp.simulation_to_dict(sim, system.sectors), "simulation")
    lines = ["t," + ",".join(system.sectors)]
    for t, x in zip(sim.t, sim.x):
        lines.append(repr(float(t)) + "," + ",".join(repr(float(v)) for v in x))
    w.csv("simulation.csv", "\n".join(lines) + "\n")
    _say(f"simulated {len(sim.t)} points on [{t0:g}, {tf:g}] h={config.step:g}")
    return EXIT_OK


def cmd_report(config: StudyConfig) -> int:
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)
    if config.T is None and config.t_range is not None:
        cmd_select_period(config)
    cmd_fit(config)
    cmd_forecast(config)
    if config.consumption:
        cmd_identify(config)
        cmd_simulate(dataclasses.replace(config, system=None))
    files = sorted(p for p in out.rglob("*") if p.is_file() and p.name != "index.json")
    index = {
        "config": {k: v for k, v in dataclasses.asdict(config).items()
                   if k not in ("outputs", "consumption", "out", "system")},
        "artifacts": [{"path": p.relative_to(out).as_posix(),
                       "sha256": hashlib.sha256(p.read_bytes()).hexdigest()} for p in files],
    }
    w = Writer(out, ["json"])
    w.json("index.json", index, "index")
    _say(f"report: {len(files)} artifacts in {out}")
    return EXIT_OK


def default_generator_spec(seed: int = 2019) -> GeneratorSpec:
    """Five sectors on a 50-year cycle sampled over 1949-2017.

    Every sector carries harmonics 1, 2, 3, 6; S2 adds a k=4 wave and S4 a k=5
    wave. Five sectors sharing only four harmonics would make the Leontief
    regressors collinear (ten columns in a nine-dimensional span), so the
    extra sector-specific waves keep the fixture identifiable. Noise is 1% of
    the dominant amplitude.
    """
    rng = np.random.default_rng(seed)
    extra = {1: (4, 2.0), 3: (5, 1.5)}
    sectors = []
    for j in range(5):
        waves = [(1, 8.0), (2, 4.0), (3, 2.0), (6, 1.0)]
        if j in extra:
            waves.append(extra[j])
        harmonics = []
        for k, amp in waves:
            amp *= rng.uniform(0.6, 1.4)
            phi = rng.uniform(0, 2 * np.pi)
            harmonics.append((k, float(amp * np.cos(phi)), float(amp * np.sin(phi))))
        sectors.append(SectorSpec(f"S{j + 1}", float(rng.uniform(60, 100)),
                                  float(rng.uniform(0.5, 2.0)), tuple(harmonics), 0.08))
    n = len(sectors)
    P = np.eye(n) - rng.uniform(0.0, 0.3, (n, n)) / n
    B = np.diag(rng.uniform(1.0, 3.0, n)) + rng.uniform(-0.2, 0.2, (n, n)) / n
    return GeneratorSpec(50, tuple(sectors), seed, 69, 1949,
                         tuple(map(tuple, P)), tuple(map(tuple, B)))


def spec_from_dict(d: dict) -> GeneratorSpec:
    sectors = tuple(SectorSpec(s["name"], s["x_bar"], s["b"],
                               tuple(tuple(h) for h in s.get("harmonics", ())), s.get("sigma", 0.0))
                    for s in d["sectors"])
    P, B = d.get("P"), d.get("B")
    return GeneratorSpec(int(d["N"]), sectors, int(d.get("seed", 0)), d.get("length"),
                         int(d.get("t0_label", 1)),
                         None if P is None else tuple(map(tuple, P)),
                         None if B is None else tuple(map(tuple, B)))


def spec_to_dict(spec: GeneratorSpec) -> dict:
    return {
        "N": spec.N, "seed": spec.seed, "length": spec.length, "t0_label": spec.t0_label,
        "sectors": [{"name": s.name, "x_bar": s.x_bar, "b": s.b,
                     "harmonics": [list(h) for h in s.harmonics], "sigma": s.sigma}
                    for s in spec.sectors],
        "P": None if spec.P is None else [list(r) for r in spec.P],
        "B": None if spec.B is None else [list(r) for r in spec.B],
    }


def cmd_generate(config: StudyConfig, spec_path: str | None = None, seed: int | None = None) -> int:
    spec = spec_from_dict(_read_json(spec_path)) if spec_path else default_generator_spec()
    if seed is not None:
        spec = dataclasses.replace(spec, seed=seed)
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)
    x, u, _ = generate_panel(spec)
    write_panel(x, out / "outputs.csv")
    files = ["outputs.csv"]
    if u is not None:
        write_panel(u, out / "consumption.csv")
        files.append("consumption.csv")
    rp.write_json(out / "truth.json", spec_to_dict(spec))
    study_cfg = {"outputs": "outputs.csv", "T": spec.N, "holdout": 2, "k_max": 12,
                 "alpha": DEFAULT_ALPHA, "normalize": True}
    if u is not None:
        study_cfg["consumption"] = "consumption.csv"
    rp.write_json(out / "config.json", study_cfg)
    _say(f"wrote {', '.join(files)}, truth.json, config.json to {out}")
    return EXIT_OK


# -- argument parsing ----------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with study settings")
    common.add_argument("--outputs", help="outputs panel CSV")
    common.add_argument("--consumption", help="consumption panel CSV")
    common.add_argument("--out", help="study directory for artifacts")
    common.add_argument("--normalize", dest="normalize", action="store_true", default=None)
    common.add_argument("--no-normalize", dest="normalize", action="store_false")
    common.add_argument("--T", "--period", dest="T", type=int, help="fit window / period")
    common.add_argument("--t-range", dest="t_range", type=_parse_range, help="period search LO:HI")
    common.add_argument("--holdback", type=int)
    common.add_argument("--k-max", dest="k_max", type=int)
    common.add_argument("--alpha", type=float)
    common.add_argument("--holdout", "--horizon", dest="holdout", type=int,
                        help="trailing points held out for forecasting")
    common.add_argument("--grouping", dest="grouping_file", help="JSON sector grouping map")
    common.add_argument("--emit-json", action="store_true")
    common.add_argument("--emit-csv", action="store_true")

    parser = argparse.ArgumentParser(prog="cyclefit", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("fit", parents=[common], help="fit trend+harmonic models per sector")
    sub.add_parser("select-period", parents=[common], help="choose T by back-extrapolation")
    sub.add_parser("identify", parents=[common], help="identify the Leontief matrices")
    sub.add_parser("forecast", parents=[common], help="forecast the held-out tail")
    sim = sub.add_parser("simulate", parents=[common], help="integrate the identified system")
    sim.add_argument("--system", help="LeontiefSystem JSON to simulate instead of identifying")
    sim.add_argument("--t0", type=float)
    sim.add_argument("--tf", type=float)
    sim.add_argument("--step", type=float)
    sub.add_parser("report", parents=[common], help="run every stage into one directory")
    gen = sub.add_parser("generate", parents=[common], help="write a synthetic study")
    gen.add_argument("--spec", help="GeneratorSpec JSON")
    gen.add_argument("--seed", type=int)
    return parser


COMMANDS = {
    "fit": cmd_fit,
    "select-period": cmd_select_period,
    "identify": cmd_identify,
    "forecast": cmd_forecast,
    "simulate": cmd_simulate,
    "report": cmd_report,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = load_config(args)
        if args.command == "generate":
            return cmd_generate(config, args.spec, args.seed)
        return COMMANDS[args.command](config)
    except NumericalError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (CycleFitError, ValueError, OSError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
