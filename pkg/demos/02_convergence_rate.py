"""Measure the convergence rate over a dyadic family of particle counts.

Doubling the particle count should cut the L1 error by at least sqrt(2):
the scheme is of order one half in the initial spacing (and usually does
better on this profile).

Run:  python demos/02_convergence_rate.py
"""

from pathlib import Path

import particle_paths as pp

OUT = Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)

data = pp.rarefaction_shock_data()
model = pp.builtin_flux("burgers", u_high=data.sup_u0 * (1 + 1e-12))
exact = pp.burgers_rarefaction_shock()

fit, reports = pp.convergence_study(model, data, exact, [26, 51, 101, 201, 401], 0.25)

print(f"{'dx*':>9}  {'L1 error':>10}  {'stability bound':>15}")
for rep in reports:
    print(f"{rep.dx0_star:9.4f}  {rep.l1_error_at_T:10.6f}  {rep.stability_bound:15.6f}")
print(f"\nleast-squares slope: {fit.slope:.3f}")
print(f"three finest only:   {fit.slope_tail:.3f}")

pp.exports.write_rate_csv(fit, OUT / "rate.csv")
print(f"wrote rate table to {OUT / 'rate.csv'}")
