import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from pnmc_h4.profile import ModuliParams, f0_at_fraction, integrate_profile  # noqa: E402
from pnmc_h4.surface import SurfaceParams, generate_grid  # noqa: E402

# one worked example per sign of C
EXAMPLES = {"parabolic": (1.0, 0.0, 0.2), "circular": (1.0, 1.0, 0.16), "hyperbolic": (1.0, -1.0, 0.1)}

# (c, C) in {1, 2} x {-1, 0, 1}, f0 at 40% of the admissible interval
SWEEP_SETS = [(c, C, f0_at_fraction(c, C, 0.4)) for c in (1.0, 2.0) for C in (-1.0, 0.0, 1.0)]


@pytest.fixture(scope="session", params=list(EXAMPLES), ids=list(EXAMPLES))
def example_grid(request):
    c, C, f0 = EXAMPLES[request.param]
    grid = generate_grid(SurfaceParams(ModuliParams(c, C, f0)))
    profile = integrate_profile(grid.params.moduli, grid.directrix.span)
    return grid, profile


def pytest_configure(config):
    config.acceptance_lines = []


def pytest_terminal_summary(terminalreporter, config):
    if config.acceptance_lines:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in sorted(config.acceptance_lines, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)


@pytest.fixture
def criterion(request):
    """``criterion(n, ok, detail)`` records the line ``criterion n: PASS|FAIL  detail`` and asserts ``ok``."""

    def record(n, ok, detail):
        line = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}"
        print(line)
        request.config.acceptance_lines.append(line)
        assert ok, line

    return record
