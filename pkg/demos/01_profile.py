"""
The mean curvature profile
==========================

Every surface in the family is driven by one positive function f(u), the
length of the mean curvature vector. It solves f' = (4/3) f sqrt(Q(f)) with
Q(f) = 1 + 9 C f^(3/2) - 9 f^2 - c^2 f^3, so f is monotone and stays
inside the interval where Q > 0.
"""

import numpy as np

from pnmc_h4.profile import (
    ModuliParams,
    admissible_interval,
    f0_at_fraction,
    integrate_profile,
    invariants_at,
    second_order_residual,
)

# the admissible interval depends on (c, C) only; f0 has to sit inside it
for c, C in [(1.0, 0.0), (1.0, 1.0), (1.0, -1.0), (2.0, 2.0)]:
    lo, hi = admissible_interval(ModuliParams(c, C, f0_at_fraction(c, C, 0.5)))
    print(f"c={c:4.1f} C={C:5.1f}  f in ({lo:.6f}, {hi:.6f})")

# integrate one profile; the branch stops by itself where Q reaches zero
p = ModuliParams(1.0, 0.0, 0.2)
curve = integrate_profile(p, (-1.0, 1.0), tol=1e-10)
print("\nspan actually covered:", curve.span)
print("why it stopped:", curve.truncation)
print(f"f runs from {curve.f[0]:.6f} to {curve.f[-1]:.6f}")

# the first-order law implies a second-order one; its residual tells how good the integration is
print(f"second-order residual: {second_order_residual(curve):.2e}")

# scalar invariants at a few values of f
for f in np.linspace(0.05, 0.3, 6):
    inv = invariants_at(f, p)
    print(f"f={f:.2f}  K={inv.K:+.5f}  kappa1={inv.kappa1:.5f}  kappa2={inv.kappa2:.5f}")
