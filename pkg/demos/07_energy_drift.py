"""Long-run energy behaviour of truncated vs exactly solved updates.

The linear-implicit scheme solves its momentum update exactly and shows
the flat, bounded energy error expected of a symplectic method.  The
truncated q-implicit schemes trade that for speed: their energy error
grows linearly, at a rate set by the truncation depth M and step size.
On short windows the growth hides below the oscillation floor; the
window here is long enough for the M=2 ramp to poke out.

Run:  python3 demos/07_energy_drift.py [steps]
      default 200000 steps (about 30 s); the drift classifications used
      in the test suite run at 3e5 (CI) and 3e6 (full-scale) steps.
"""

import sys

import numpy as np

from sympdefect import (
    Scheme,
    SchemeConfig,
    energy_drift_run,
    reference_initial_state,
    tokamak_model,
)

steps = int(sys.argv[1]) if len(sys.argv) > 1 else 200_000
stride = max(1, steps // 1000)

model = tokamak_model()
state = reference_initial_state(model)
configs = [
    SchemeConfig(Scheme.LINEAR_IMPLICIT_EM, 0.25),
    SchemeConfig(Scheme.Q_IMPLICIT, 0.25, M=2),
    SchemeConfig(Scheme.Q_IMPLICIT, 0.25, M=3),
]

print(f"h = 0.25, {steps} steps, sampled every {stride}\n")
for series in energy_drift_run(model, configs, state, steps, stride):
    e = np.asarray(series.errors)
    half = e[: e.size // 2]
    print(f"{series.label}:")
    print(f"  classification: {series.classification}")
    print(f"  max |H - H0| first half {half.max():.3e}, full run {e.max():.3e}")
print()
print("The exactly solved scheme stays flat; the truncated schemes creep.")
print("Their creep rate falls with more sweeps, and over any fixed window")
print("it also falls with smaller h, which is the pseudo-symplectic deal:")
print("bounded-looking behaviour on the timescales the step size buys.")
