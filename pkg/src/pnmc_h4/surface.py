"""Closed-form parametrizations of the surfaces and sampled grids.

With sigma the directrix, f the profile and kappa_hat = 3 sqrt|C| f^(3/4),

    C = 0:  Phi(u, v) = sigma(u) + v b1 + v^2 f(u)^(3/4) b2
    C > 0:  Phi(u, t) = sigma(u) + (sin t b1 + (cos t - 1) b2) / kappa_hat(u)
    C < 0:  Phi(u, t) = sigma(u) + (sinh t b1 + (cosh t - 1) b2) / kappa_hat(u)

For C = 0 the second coordinate is the flow parameter v of E2; for C != 0
it is t = kappa_hat(u) v.
"""

from dataclasses import dataclass

import numpy as np

from . import minkowski as mk
from .errors import InvalidParameters, InvalidResolution, TruncatedSpan
from .frame_flow import NODE_SPACING, Case, integrate_directrix
from .profile import DEFAULT_TOL, ModuliParams

MARGIN = 0.05


def evaluate(d, u, t):
    """Surface point(s) Phi(u, t) for a directrix ``d``; broadcasts over u, t."""
    u, t = np.broadcast_arrays(np.asarray(u, dtype=float), np.asarray(t, dtype=float))
    sigma = d.sigma(u)
    f = d.f_at(u)[..., None]
    t = t[..., None]
    if d.case is Case.PARABOLIC:
        return sigma + t * d.b1 + t**2 * f**0.75 * d.b2
    khat = 3.0 * np.sqrt(abs(d.params.C)) * f**0.75
    # cos t - 1 = -2 sin^2(t/2) and cosh t - 1 = 2 sinh^2(t/2) avoid cancellation near t = 0
    if d.case is Case.CIRCULAR:
        offset = np.sin(t) * d.b1 - 2.0 * np.sin(0.5 * t) ** 2 * d.b2
    else:
        offset = np.sinh(t) * d.b1 + 2.0 * np.sinh(0.5 * t) ** 2 * d.b2
    return sigma + offset / khat


def chart_parameter(f, v, C):
    """t = 3 sqrt|C| f^(3/4) v, or v itself when C = 0."""
    if C == 0:
        return np.asarray(v, dtype=float) * 1.0
    return 3.0 * np.sqrt(abs(C)) * np.asarray(f, dtype=float) ** 0.75 * v


def coordinate_map(u, v, d):
    """Map the flow coordinates (u, v) of E2 to the surface coordinate t."""
    return chart_parameter(d.f_at(u), v, d.params.C)


def make_sampler(d):
    """Point sampler ``(u, t) -> Phi`` suitable for :mod:`pnmc_h4.verifier`."""
    return lambda u, t: evaluate(d, u, t)


@dataclass(frozen=True)
class SurfaceParams:
    moduli: ModuliParams
    u_span: tuple = (-0.5, 0.5)
    t_span: tuple = (0.0, 1.0)
    nu: int = 64
    nt: int = 64
    tol: float = DEFAULT_TOL
    margin: float = MARGIN

    def validate(self):
        self.moduli.validate()
        if int(self.nu) < 2 or int(self.nt) < 2:
            raise InvalidResolution("nu and nt must both be at least 2")
        if not self.u_span[0] < self.u_span[1] or not self.t_span[0] < self.t_span[1]:
            raise InvalidParameters("u_span and t_span must be increasing intervals")
        if not self.tol > 0 or self.margin < 0:
            raise InvalidParameters("tol must be positive and margin non-negative")
        return self


@dataclass(frozen=True)
class SurfaceGrid:
    """``points[i, j] = Phi(u_values[i], t_values[j])``."""

    points: np.ndarray
    u_values: np.ndarray
    t_values: np.ndarray
    case: Case
    directrix: object
    params: SurfaceParams

    @property
    def shape(self):
        return self.points.shape[:2]

    @property
    def sampler(self):
        return make_sampler(self.directrix)

    def with_points(self, points):
        return SurfaceGrid(np.asarray(points, dtype=float), self.u_values, self.t_values,
                           self.case, self.directrix, self.params)


def _grid_nodes(u_lo, u_hi, nu, margin):
    """Directrix nodes: a uniform refinement of the grid's u-lattice, padded by ``margin``."""
    du = (u_hi - u_lo) / (nu - 1)
    m = max(1, int(np.ceil(du / NODE_SPACING)))
    step = du / m
    pad = int(np.ceil(margin / step)) if margin > 0 else 0
    k = np.arange(-pad, (nu - 1) * m + pad + 1)
    nodes = u_lo + k * step
    nodes[pad::m][:nu] = np.linspace(u_lo, u_hi, nu)
    return nodes, pad, m


def generate_grid(p):
    """Integrate the directrix and tabulate the surface over the (u, t) lattice.

    The directrix nodes contain every grid u-value, so the row t = 0 of
    the grid reproduces the integrated directrix samples.
    """
    p.validate()
    u_lo, u_hi = map(float, p.u_span)
    nodes, pad, m = _grid_nodes(u_lo, u_hi, int(p.nu), float(p.margin))
    d = integrate_directrix(p.moduli, (nodes[0], nodes[-1]), tol=p.tol, nodes=nodes)
    lo, hi = d.span
    if lo > u_lo or hi < u_hi:
        raise TruncatedSpan(
            f"the monotone branch only covers u in [{lo:.6g}, {hi:.6g}]; "
            f"requested [{u_lo:.6g}, {u_hi:.6g}] ({'; '.join(d.truncation)})"
        )
    u_values = np.linspace(u_lo, u_hi, int(p.nu))
    t_values = np.linspace(float(p.t_span[0]), float(p.t_span[1]), int(p.nt))
    U, T = np.meshgrid(u_values, t_values, indexing="ij")
    points = evaluate(d, U, T)
    return SurfaceGrid(points, u_values, t_values, d.case, d, p)


def membership_residual(points):
    """Max |<Phi, Phi> + 1| over an array of points."""
    return float(np.max(np.abs(mk.norm_sq(points) + 1.0)))


def circle_radius_residual(d, u0, t):
    """For C > 0: max | <Phi - centre, Phi - centre> - 1/kappa_hat^2 | along the E2-circle at u0."""
    khat = float(d.kappa_hat(u0))
    centre = d.sigma(u0) - d.b2 / khat
    pts = evaluate(d, np.full_like(np.asarray(t, dtype=float), u0), t)
    return float(np.max(np.abs(mk.norm_sq(pts - centre) - 1.0 / khat**2)))
