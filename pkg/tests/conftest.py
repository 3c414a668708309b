from pathlib import Path

import numpy as np
import pytest

from cyclefit.harmonic import HarmonicTerm, HarmonicTrendModel, evaluate

FIXTURES = Path(__file__).parent / "fixtures"


def harmonic_series(N, x_bar=0.0, slope=0.0, terms=(), noise=0.0, rng=None, length=None):
    """Sample ``x_bar + slope (t - t_bar) + sum(a cos + b sin)`` on ``t = 1..length``."""
    model = HarmonicTrendModel(x_bar, slope, tuple(HarmonicTerm(k, a, b) for k, a, b in terms), N)
    t = np.arange(1, (length or N) + 1, dtype=float)
    x = np.asarray(evaluate(model, t), dtype=float)
    if noise:
        x = x + noise * rng.standard_normal(len(t))
    return x


def polar_terms(rng, ks, amplitude):
    out = []
    for k in ks:
        phi = rng.uniform(0, 2 * np.pi)
        out.append((k, amplitude * np.cos(phi), amplitude * np.sin(phi)))
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def study_dir():
    return FIXTURES / "study"


def write_csv(path, text):
    path.write_text(text, encoding="utf-8")
    return path


# acceptance outcomes, printed in the terminal summary as one line per criterion
ACCEPTANCE = {}
_SESSION = {}


def record(criterion, ok, detail=""):
    ACCEPTANCE[criterion] = (bool(ok), detail)
    print(f"C{criterion}: {'PASS' if ok else 'FAIL'} {detail}")
    return bool(ok)


def pytest_sessionstart(session):
    import time
    _SESSION["start"] = time.perf_counter()


def pytest_terminal_summary(terminalreporter):
    import time
    if not ACCEPTANCE:
        return
    elapsed = time.perf_counter() - _SESSION.get("start", time.perf_counter())
    terminalreporter.section("acceptance criteria")
    for c in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[c]
        if c == 11:
            ok = ok and elapsed < 120
            detail += f"; suite wall time {elapsed:.1f}s (limit 120s)"
        terminalreporter.write_line(f"C{c}: {'PASS' if ok else 'FAIL'} {detail}")
