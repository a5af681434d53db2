"""
Sweeping the (c, C) family
==========================

The family has two parameters. A sweep picks f0 at a fixed fraction of
each admissible interval, builds and verifies the surface, and records
points where the requested u-range runs past the monotone branch instead
of stopping.
"""

from pnmc_h4.cli import RunConfig, SweepConfig, run_sweep

sweep = SweepConfig(c_values=(0.5, 1.0, 2.0), C_values=(-2.0, 0.0, 2.0), template=RunConfig(nu=24, nt=24))
for row in run_sweep(sweep):
    if row["status"] == "error":
        print(f"c={row['c']:.1f} C={row['C']:+.1f}  {row['error'][:90]}")
    else:
        worst = max(row["residuals"], key=lambda k: row["residuals"][k])
        print(f"c={row['c']:.1f} C={row['C']:+.1f}  f0={row['f0']:.5f}  {row['status']}"
              f"  (largest residual: {worst} {row['residuals'][worst]:.1e})")
