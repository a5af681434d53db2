"""
Checking a surface from its points alone
========================================

The verifier never looks at the frame used to build the surface. It
differentiates the point map by finite differences, rebuilds the normal
frame and the second fundamental form, and tests the defining identities.
The product cylinder S^1(1) x H^1(sqrt 2) is a closed-form reference:
its mean curvature vector is parallel, |H|^2 = 9/8 and K = 0, but its
shape operators do not have the biconservative eigenvalues.
"""

import numpy as np

from pnmc_h4.profile import ModuliParams, integrate_profile
from pnmc_h4.surface import SurfaceParams, generate_grid
from pnmc_h4.verifier import (
    check_shape_and_biconservative,
    extrinsic_gauss_curvature,
    fundamental_forms,
    local_geometry,
    mean_curvature,
    verify_grid,
)


def cylinder(u, t):
    u, t = np.broadcast_arrays(np.asarray(u, float), np.asarray(t, float))
    s = np.sqrt(2.0)
    return np.stack([np.cos(u), np.sin(u), 0 * u, s * np.sinh(t), s * np.cosh(t)], -1)


# full report on a generated grid
p = ModuliParams(1.0, 1.0, 0.16)
grid = generate_grid(SurfaceParams(p))
print(verify_grid(grid, integrate_profile(p, grid.directrix.span)).to_text())

# the cylinder is PNMC but not one of ours: the shape check catches it
geo = local_geometry(cylinder, 0.3, 0.2)
shape = check_shape_and_biconservative(geo.forms, geo.f, 1.0, geo.grad_f)
print(f"\ncylinder: f = {geo.f:.9f} (sqrt(9/8) = {np.sqrt(9 / 8):.9f}), PNMC residual {geo.pnmc:.1e}, "
      f"shape_A3 residual {float(shape.shape_A3):.3f}")

# the stencils are fourth order: the error falls 16x per halving until roundoff (about eps / h^2) takes over
print("\n      h     |f - sqrt(9/8)|        |K|")
for h in (0.2, 0.1, 0.05, 0.025, 0.0125, 1e-3, 5e-4, 1e-4):
    ff = fundamental_forms(cylinder, 0.3, 0.2, h)
    print(f"{h:9.1e}   {abs(mean_curvature(ff)[1] - np.sqrt(9 / 8)):.3e}   {abs(extrinsic_gauss_curvature(ff)):.3e}")
