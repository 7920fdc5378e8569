"""Measure how fast the symplectic defect shrinks with the step size.

Sweeping h over a log grid and fitting log(defect) against log(h) shows
the headline scaling: with M fixed-point sweeps, both the diagonal
defect delta and the antidiagonal deviation alpha vanish at order
h^{M+1}.  One extra sweep buys one extra order of symplecticity.

Run:  python3 demos/03_defect_orders.py
"""

from sympdefect import (
    Scheme,
    default_h_grid,
    defect_sweep,
    reference_initial_state,
    tokamak_model,
)

model = tokamak_model()
state = reference_initial_state(model)
sweep = defect_sweep(model, Scheme.Q_IMPLICIT, [1, 2, 3], default_h_grid(), state)

print("tokamak model, q-implicit scheme, 10 steps h in [0.02, 0.2]\n")
print(f"{'M':>3} {'expected':>9} {'slope(delta)':>13} {'slope(alpha)':>13}")
for m in (1, 2, 3):
    delta_fit = sweep.fits[("delta", m)]
    alpha_fit = sweep.fits[("alpha", m)]
    print(f"{m:>3} {m + 1:>9} {delta_fit.slope:>13.4f} {alpha_fit.slope:>13.4f}")

print()
print("Sample rows (largest and smallest step per M):")
for m in (1, 2, 3):
    rows = [r for r in sweep.rows if r["M"] == m]
    for r in (rows[0], rows[-1]):
        print(
            f"  M={m} h={r['h']:.3f}: delta={r['delta']:.3e} alpha={r['alpha']:.3e}"
        )
