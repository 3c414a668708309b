"""Two-step holdout forecast and the turning-point calendar of each harmonic.

Run: python demos/forecast_and_phases.py
"""

import numpy as np

from cyclefit.forecast import forecast, holdout_evaluate, phase_schedule
from cyclefit.harmonic import HarmonicTrendModel

rng = np.random.default_rng(5)
N, H = 50, 2
model = HarmonicTrendModel.from_intercept(
    -7.1, 3.34, [(1, 7.27, -8.9), (2, 4.4, -4.11), (3, -1.34, -0.12), (6, 0.22, -0.1)], N)
t = np.arange(1, N + H + 1, dtype=float)
clean = model(t)
x = clean + 0.01 * np.mean(np.abs(clean)) * rng.standard_normal(len(t))

res, fit, _ = holdout_evaluate(x, N, H)
print("kept harmonics:", fit.model.ks)
for ti, v, o in zip(res.t, res.value, x[N:]):
    print(f"  t={ti:.0f}  forecast {v:8.3f}  observed {o:8.3f}")
print(f"MAE {res.mae:.3f}  RMSE {res.rmse:.3f}  MAPE {res.mape:.2f}%")

# past 0.2 N the forecast warns: the model is only meant for horizons short against N
ahead = forecast(fit.model, 12)
print("\n12-step path:", np.round(ahead.value, 2))

schedule = phase_schedule(fit.model, (35.0, 80.0), t0_label=1966)
print("\nturning points, calendar year = 1966 + t - 1:")
for p in schedule.events():
    print(f"  {p.year:7.2f}  k={p.k}  {p.direction}")
