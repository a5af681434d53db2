"""Moving-frame integration along the E1 direction.

The adapted frame (Phi, E1, E2, E3, E4) of a PNMC biconservative surface
satisfies, along an integral curve of E1 parametrized by arc length u,

    Phi' = E1
    E1'  = Phi - f E3 + c f^(3/2) E4
    E2'  = 0
    E3'  = f E1
    E4'  = -c f^(3/2) E1

together with the profile equation for f. Integrating this 26-dimensional
system from a canonical frame yields the directrix ``sigma(u) = Phi(u)``,
the constant unit vector ``b1 = E2`` and the vector field ``xi`` whose
value at u = 0 fixes ``b2``.
"""

import enum
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import BPoly

from . import minkowski as mk
from .errors import DriftExceeded, InvalidParameters, NegativeRadicand, NonPositiveF, OutOfSpan, StepFailure
from .profile import (
    DEFAULT_TOL,
    F_FLOOR,
    RADICAND_FLOOR,
    radicand,
    second_derivative,
    third_derivative,
)

DRIFT_LIMIT = 1e-6
NODE_SPACING = 0.02
# Without a cap DOP853 takes steps of ~0.3 at tol 1e-10, and its dense output
# between them is too rough for the Hermite rebuild to be differentiated
# three times; 0.05 keeps node data consistent to ~1e-13.
MAX_STEP = 0.05


class Case(enum.Enum):
    PARABOLIC = 0  # C = 0, xi null
    CIRCULAR = 1  # C > 0, xi spacelike
    HYPERBOLIC = -1  # C < 0, xi timelike

    @classmethod
    def of(cls, C):
        return cls(int(np.sign(C)))


@dataclass(frozen=True)
class FrameState:
    u: float
    f: float
    Phi: np.ndarray
    E1: np.ndarray
    E2: np.ndarray
    E3: np.ndarray
    E4: np.ndarray

    @property
    def frame(self):
        """Rows Phi, E1, E2, E3, E4."""
        return np.stack([self.Phi, self.E1, self.E2, self.E3, self.E4])

    @classmethod
    def from_frame(cls, u, f, frame):
        frame = np.asarray(frame, dtype=float)
        return cls(float(u), float(f), *(frame[i].copy() for i in range(5)))


def canonical_initial_frame(f0):
    """Frame at u = 0: Phi at the apex of H^4, E1..E4 along e1..e4."""
    if f0 <= 0:
        raise NonPositiveF("f0 must be positive")
    return FrameState(0.0, float(f0), mk.basis(5), mk.basis(1), mk.basis(2), mk.basis(3), mk.basis(4))


def _frame_rhs(f, frame, c):
    """d/du of the frame rows; ``frame`` has shape (..., 5, 5)."""
    phi, e1, _, e3, e4 = (frame[..., i, :] for i in range(5))
    fc = (c * f**1.5)[..., None]
    f_ = np.asarray(f)[..., None]
    d = np.empty_like(frame)
    d[..., 0, :] = e1
    d[..., 1, :] = phi - f_ * e3 + fc * e4
    d[..., 2, :] = 0.0
    d[..., 3, :] = f_ * e1
    d[..., 4, :] = -fc * e1
    return d


def frame_derivative(state, c, C):
    """Return ``(f', dframe)`` with ``dframe`` rows dPhi, dE1, dE2, dE3, dE4."""
    q = radicand(state.f, c, C)
    if q < 0:
        raise NegativeRadicand(f"Q({state.f:g}) < 0")
    fp = 4.0 / 3.0 * state.f * np.sqrt(q)
    return fp, _frame_rhs(np.float64(state.f), state.frame, c)


def _xi(f, frame, c, C):
    """xi at every sample; ``f`` has shape (n,), ``frame`` (n, 5, 5)."""
    q = np.maximum(radicand(f, c, C), 0.0)
    phi, e1, e3, e4 = frame[..., 0, :], frame[..., 1, :], frame[..., 3, :], frame[..., 4, :]
    # (3/4) f'/f = sqrt(Q) on the monotone branch
    w = (np.sqrt(q)[..., None] * e1 + (3.0 * f)[..., None] * e3
         - (c * f**1.5)[..., None] * e4 + phi)
    if C == 0:
        return w
    return w / (3.0 * np.sqrt(abs(C)) * f**0.75)[..., None]


def xi_field(state, c, C):
    """The field xi at one frame state.

    ``w = sqrt(Q) E1 + 3 f E3 - c f^(3/2) E4 + Phi`` is the R^5_1 covariant
    derivative of E2 along E2, with ``<w, w> = 9 C f^(3/2)``. For C = 0 xi
    is w itself; otherwise it is w divided by kappa_hat = 3 sqrt|C| f^(3/4).
    """
    return _xi(np.float64(state.f), state.frame, c, C)


def extract_axes(state0, c, C):
    """Constant axis vectors ``(b1, b2)`` from the frame at u = 0."""
    b1 = state0.E2.copy()
    xi0 = xi_field(state0, c, C)
    if C == 0:
        b2 = xi0 / (2.0 * state0.f**0.75)
    elif C > 0:
        b2 = -xi0
    else:
        b2 = xi0
    return b1, b2


def _sigma_derivatives(f, fp, frame, c):
    """Phi and its first three u-derivatives at each node, shape (n, 4, 5)."""
    phi, e1, e3, e4 = frame[:, 0], frame[:, 1], frame[:, 3], frame[:, 4]
    col = lambda a: a[:, None]
    d2 = phi - col(f) * e3 + col(c * f**1.5) * e4
    d3 = col(1.0 - f**2 - c**2 * f**3) * e1 - col(fp) * e3 + col(1.5 * c * np.sqrt(f) * fp) * e4
    return np.stack([phi, e1, d2, d3], axis=1)


@dataclass(frozen=True)
class DirectrixResult:
    """Frames sampled along the directrix, with the derived axis vectors.

    ``frames[i]`` holds the rows (Phi, E1, E2, E3, E4) at ``u[i]``. Between
    nodes, ``sigma`` and ``f_at`` use degree-7 Hermite interpolation built
    from the exact derivatives the frame equations provide at each node.
    """

    u: np.ndarray
    f: np.ndarray
    frames: np.ndarray
    b1: np.ndarray
    b2: np.ndarray
    xi: np.ndarray
    case: Case
    params: object
    truncation: tuple = ()
    max_step_drift: float = 0.0
    _sigma: object = field(default=None, init=False, repr=False, compare=False)
    _fpoly: object = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        if len(self.u) < 2:
            return
        c, C = self.params.c, self.params.C
        fp = 4.0 / 3.0 * self.f * np.sqrt(np.maximum(radicand(self.f, c, C), 0.0))
        sig = _sigma_derivatives(self.f, fp, self.frames, c)
        fdat = np.stack([self.f, fp, second_derivative(self.f, fp, c), third_derivative(self.f, fp, c)], axis=1)
        object.__setattr__(self, "_sigma", BPoly.from_derivatives(self.u, sig, extrapolate=False))
        object.__setattr__(self, "_fpoly", BPoly.from_derivatives(self.u, fdat, extrapolate=False))

    @property
    def span(self):
        return float(self.u[0]), float(self.u[-1])

    @property
    def sigma_samples(self):
        return self.frames[:, 0, :]

    @property
    def states(self):
        return [FrameState.from_frame(a, b, fr) for a, b, fr in zip(self.u, self.f, self.frames)]

    def _check(self, u):
        u = np.asarray(u, dtype=float)
        lo, hi = self.span
        if np.any((u < lo) | (u > hi)) or np.any(np.isnan(u)):
            raise OutOfSpan(f"u outside the integrated span [{lo:.6g}, {hi:.6g}]")
        return u

    def sigma(self, u):
        """Directrix point(s) sigma(u), shape ``u.shape + (5,)``."""
        return self._sigma(self._check(u))

    def f_at(self, u):
        return self._fpoly(self._check(u))

    def kappa_hat(self, u):
        return 3.0 * np.sqrt(abs(self.params.C)) * self.f_at(u) ** 0.75


def _uniform_nodes(lo, hi, spacing):
    if hi <= lo:
        return np.array([lo])
    n = int(np.ceil((hi - lo) / spacing)) + 1
    return np.linspace(lo, hi, n)


def integrate_directrix(params, u_span=(-0.5, 0.5), tol=DEFAULT_TOL, nodes=None,
                        node_spacing=NODE_SPACING, drift_limit=DRIFT_LIMIT, max_step=MAX_STEP):
    """Integrate the frame system from :func:`canonical_initial_frame`.

    The solution is recorded at ``nodes`` (uniform with ``node_spacing``
    over ``u_span`` by default; u = 0 is always added). Gram drift is
    checked at every accepted step and every node; no re-orthonormalization
    is ever applied.

    Raises
    ------
    Inadmissible
        If Q(f0) <= 0.
    StepFailure
        If the integrator reports failure.
    DriftExceeded
        If any Gram entry strays from diag(-1, 1, 1, 1, 1) by more than
        ``drift_limit``.
    """
    params.validate()
    c, C, f0 = params.c, params.C, params.f0
    u_lo, u_hi = map(float, u_span)
    if u_lo > u_hi:
        raise InvalidParameters("u_span must be increasing")
    u_lo, u_hi = min(u_lo, 0.0), max(u_hi, 0.0)
    if nodes is None:
        nodes = _uniform_nodes(u_lo, u_hi, node_spacing)
    nodes = np.union1d(np.asarray(nodes, dtype=float), [0.0])

    start = canonical_initial_frame(f0)
    y0 = np.concatenate([[f0], start.frame.ravel()])

    def rhs(u, y):
        f = max(y[0], F_FLOOR)
        fp = 4.0 / 3.0 * f * np.sqrt(max(radicand(f, c, C), 0.0))
        d = _frame_rhs(np.float64(f), y[1:].reshape(5, 5), c)
        return np.concatenate([[fp], d.ravel()])

    def low_radicand(u, y):
        return radicand(max(y[0], F_FLOOR), c, C) - RADICAND_FLOOR

    def low_f(u, y):
        return y[0] - F_FLOOR

    for ev in (low_radicand, low_f):
        ev.terminal = True
        ev.direction = -1

    us, ys, notes = [np.array([0.0])], [y0[None, :]], []
    step_drift = 0.0
    for side, end in (("lower", u_lo), ("upper", u_hi)):
        if end == 0.0:
            continue
        sol = solve_ivp(rhs, (0.0, end), y0, method="DOP853", rtol=tol, atol=tol,
                        max_step=max_step, dense_output=True, events=[low_radicand, low_f])
        if sol.status == -1:
            raise StepFailure(f"frame integration failed on the {side} side: {sol.message}")
        step_drift = max(step_drift, float(np.max(mk.gram_drift(sol.y[1:].T.reshape(-1, 5, 5)))))
        for name, times in zip(("Q(f) < 1e-10", "f < 1e-12"), sol.t_events):
            if len(times):
                notes.append(f"{side}: {name} at u = {times[0]:.12g}")
        reached = sol.t[-1]
        pts = nodes[(nodes >= min(0.0, reached)) & (nodes <= max(0.0, reached)) & (nodes != 0.0)]
        if len(pts):
            us.append(pts)
            ys.append(sol.sol(pts).T)

    u = np.concatenate(us)
    y = np.concatenate(ys)
    order = np.argsort(u)
    u, y = u[order], y[order]
    f = y[:, 0]
    frames = y[:, 1:].reshape(-1, 5, 5)

    node_drift = float(np.max(mk.gram_drift(frames)))
    worst = max(step_drift, node_drift)
    if worst > drift_limit:
        raise DriftExceeded(f"Gram drift {worst:.3e} exceeds {drift_limit:.1e}")

    b1, b2 = extract_axes(start, c, C)
    return DirectrixResult(
        u=u, f=f, frames=frames, b1=b1, b2=b2, xi=_xi(f, frames, c, C),
        case=Case.of(C), params=params, truncation=tuple(notes), max_step_drift=step_drift,
    )


def axis_targets(result, f=None):
    """Prescribed value of <sigma(u), b2> at each node (or at given f)."""
    f = result.f if f is None else np.asarray(f)
    C = result.params.C
    if C == 0:
        return -1.0 / (2.0 * f**0.75)
    khat = 3.0 * np.sqrt(abs(C)) * f**0.75
    return 1.0 / khat if C > 0 else -1.0 / khat


def constraint_residual(result):
    """Max over nodes of |<sigma(u), b2> - target(u)|."""
    dots = mk.inner(result.sigma_samples, result.b2)
    return float(np.max(np.abs(dots - axis_targets(result))))


def gram_drift_max(result):
    return max(result.max_step_drift, float(np.max(mk.gram_drift(result.frames))))


def hyperboloid_residual(result):
    return float(np.max(np.abs(mk.norm_sq(result.sigma_samples) + 1.0)))


def e2_constancy(result):
    return float(np.max(np.abs(result.frames[:, 2, :] - result.frames[0, 2, :])))


def b1_orthogonality(result):
    """Max |<sigma(u), b1>|; the directrix lies in the hyperplane orthogonal to b1."""
    return float(np.max(np.abs(mk.inner(result.sigma_samples, result.b1))))


def xi_propagation_residual(result):
    """Deviation of xi from its predicted transport along the directrix.

    For C = 0, xi(u) = 2 f(u)^(3/4) b2; otherwise xi is constant.
    """
    if result.case is Case.PARABOLIC:
        pred = 2.0 * result.f[:, None] ** 0.75 * result.b2
    else:
        i0 = int(np.argmin(np.abs(result.u)))
        pred = result.xi[i0]
    return float(np.max(np.abs(result.xi - pred)))


def accel_norm_residual(result):
    """Max |<w, w> - 9 C f^(3/2)| with w the E2-acceleration rebuilt from xi."""
    C = result.params.C
    scale = 1.0 if C == 0 else 3.0 * np.sqrt(abs(C)) * result.f**0.75
    w = result.xi * np.asarray(scale)[..., None] if C != 0 else result.xi
    return float(np.max(np.abs(mk.norm_sq(w) - 9.0 * C * result.f**1.5)))
