"""The mean curvature profile f(u) and the scalar invariants it determines.

Along the integral curves of E1 the mean curvature obeys the first-order
equation

    f' = (4/3) f sqrt(Q(f)),   Q(f) = 1 + 9 C f^(3/2) - 9 f^2 - c^2 f^3,

which is a first integral of

    f f'' - (7/4) f'^2 + (4/3) f^2 + 4 f^4 + (4/3) c^2 f^5 = 0.

Only the monotone branch (f' > 0) is followed; integration stops once Q
drops below ``RADICAND_FLOOR``.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicHermiteSpline
from scipy.optimize import bisect

from .errors import (
    Inadmissible,
    InvalidParameters,
    NegativeRadicand,
    NonPositiveF,
    OutOfSpan,
    StepFailure,
    TooFewSamples,
)

DEFAULT_TOL = 1e-10
RADICAND_FLOOR = 1e-10
F_FLOOR = 1e-12
ROOT_XTOL = 1e-12
DEFAULT_SAMPLES = 513


@dataclass(frozen=True)
class ModuliParams:
    """Shape-operator constant ``c``, integration constant ``C`` and ``f0 = f(0)``."""

    c: float
    C: float
    f0: float

    def validate(self):
        if not np.isfinite([self.c, self.C, self.f0]).all():
            raise InvalidParameters("c, C and f0 must be finite")
        if self.c == 0:
            raise InvalidParameters("c must be non-zero")
        if self.f0 <= 0:
            raise NonPositiveF("f0 must be positive")
        q = radicand(self.f0, self.c, self.C)
        if q <= 0:
            raise Inadmissible(f"Q(f0) ≤ 0 (Q({self.f0:g}) = {q:.6g})")
        return self

    @property
    def sign(self):
        """-1, 0 or +1 according to the sign of C."""
        return int(np.sign(self.C))


def radicand(f, c, C):
    """Q(f) = 1 + 9 C f^(3/2) - 9 f^2 - c^2 f^3, for f > 0."""
    f = np.asarray(f, dtype=float)
    if np.any(f <= 0):
        raise NonPositiveF("Q is only defined for f > 0")
    q = 1.0 + 9.0 * C * f**1.5 - 9.0 * f**2 - c**2 * f**3
    return q if q.ndim else float(q)


def slope(f, c, C):
    """f' on the monotone branch, (4/3) f sqrt(Q(f))."""
    q = radicand(f, c, C)
    if np.any(q < 0):
        raise NegativeRadicand("Q(f) < 0")
    return 4.0 / 3.0 * np.asarray(f) * np.sqrt(q)


def second_derivative(f, fp, c):
    """f'' from the second-order equation, given f and f'."""
    return (1.75 * fp**2 - 4.0 / 3.0 * f**2 - 4.0 * f**4 - 4.0 / 3.0 * c**2 * f**5) / f


def third_derivative(f, fp, c):
    fpp = second_derivative(f, fp, c)
    p = 1.75 * fp**2 - 4.0 / 3.0 * f**2 - 4.0 * f**4 - 4.0 / 3.0 * c**2 * f**5
    dp_df = -8.0 / 3.0 * f - 16.0 * f**3 - 20.0 / 3.0 * c**2 * f**4
    dp_dfp = 3.5 * fp
    return (dp_df * fp + dp_dfp * fpp) / f - p * fp / f**2


def _radicand_roots(c, C):
    """Positive real roots of Q, located through the sextic in s = sqrt(f)."""
    # Q(s^2) = -c^2 s^6 - 9 s^4 + 9 C s^3 + 1
    coeffs = [-(c**2), 0.0, -9.0, 9.0 * C, 0.0, 0.0, 1.0]
    roots = np.roots(coeffs)
    real = roots[np.abs(roots.imag) < 1e-9].real
    return np.sort(real[real > 0] ** 2)


def admissible_interval(params):
    """Maximal interval ``(f_lo, f_hi)`` around ``f0`` on which Q > 0.

    Root candidates come from the sextic in sqrt(f); each sign change is
    then refined by bisection to ``ROOT_XTOL``. ``f_lo`` is 0 when Q stays
    positive down to f = 0.
    """
    params.validate()
    c, C, f0 = params.c, params.C, params.f0
    q = lambda f: radicand(f, c, C)
    roots = _radicand_roots(c, C)

    above = roots[roots > f0]
    lo = f0
    f_hi = None
    for k, r in enumerate(above):
        probe = 0.5 * (r + above[k + 1]) if k + 1 < len(above) else 2.0 * r + 1.0
        if q(probe) < 0:
            f_hi = bisect(q, lo, probe, xtol=ROOT_XTOL)
            break
        lo = probe
    if f_hi is None:
        # Q -> -inf as f -> inf because c != 0; widen until a sign change shows up
        probe = 2.0 * lo + 1.0
        while q(probe) >= 0:
            probe *= 2.0
        f_hi = bisect(q, lo, probe, xtol=ROOT_XTOL)

    below = roots[roots < f0][::-1]
    hi = f0
    f_lo = 0.0
    for k, r in enumerate(below):
        probe = 0.5 * (r + below[k + 1]) if k + 1 < len(below) else 0.5 * r
        if q(probe) < 0:
            f_lo = bisect(q, probe, hi, xtol=ROOT_XTOL)
            break
        hi = probe
    return f_lo, f_hi


def f0_at_fraction(c, C, fraction):
    """Initial value a given fraction of the way up the branch of Q > 0 that starts at f = 0."""
    if not 0 < fraction < 1:
        raise InvalidParameters("fraction must lie strictly between 0 and 1")
    f_lo, f_hi = admissible_interval(ModuliParams(c, C, 1e-9))
    return f_lo + fraction * (f_hi - f_lo)


@dataclass(frozen=True)
class ProfileSample:
    u: float
    f: float
    fprime: float


@dataclass(frozen=True)
class ProfileCurve:
    """Samples of the monotone profile with cubic Hermite interpolation.

    ``truncation`` lists why integration stopped short of the requested
    span, one entry per side that was cut off.
    """

    u: np.ndarray
    f: np.ndarray
    fprime: np.ndarray
    params: ModuliParams
    truncation: tuple = ()
    _spline: object = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        if len(self.u) >= 2:
            object.__setattr__(self, "_spline", CubicHermiteSpline(self.u, self.f, self.fprime))

    def __len__(self):
        return len(self.u)

    @property
    def span(self):
        return float(self.u[0]), float(self.u[-1])

    @property
    def samples(self):
        return [ProfileSample(float(a), float(b), float(d)) for a, b, d in zip(self.u, self.f, self.fprime)]

    def _check(self, u):
        u = np.asarray(u, dtype=float)
        lo, hi = self.span
        if np.any((u < lo) | (u > hi)):
            raise OutOfSpan(f"u outside the integrated span [{lo}, {hi}]")
        return u

    def __call__(self, u):
        u = self._check(u)
        if self._spline is None:
            return np.full(u.shape, self.f[0]) if u.ndim else float(self.f[0])
        return self._spline(u)

    def derivative(self, u):
        u = self._check(u)
        if self._spline is None:
            return np.full(u.shape, self.fprime[0]) if u.ndim else float(self.fprime[0])
        return self._spline(u, 1)

    def with_fprime(self, fprime):
        """Copy with replaced derivative samples (used for fault injection)."""
        return ProfileCurve(self.u, self.f, np.asarray(fprime, dtype=float), self.params, self.truncation)


def _halt_events(c, C):
    def low_radicand(u, y):
        return radicand(max(y[0], F_FLOOR), c, C) - RADICAND_FLOOR

    def low_f(u, y):
        return y[0] - F_FLOOR

    for ev in (low_radicand, low_f):
        ev.terminal = True
        ev.direction = -1
    return [low_radicand, low_f]


def _truncation_reason(sol, side):
    reasons = ("Q(f) < 1e-10", "f < 1e-12")
    for ev, times in zip(reasons, sol.t_events):
        if len(times):
            return f"{side}: {ev} at u = {times[0]:.12g}"
    return None


def integrate_profile(params, u_span=(-1.0, 1.0), tol=DEFAULT_TOL, n_samples=DEFAULT_SAMPLES):
    """Solve f' = (4/3) f sqrt(Q(f)), f(0) = f0, over ``u_span``.

    Integration runs outward from u = 0 in both directions with DOP853 at
    ``rtol = atol = tol`` and is sampled on a uniform grid of ``n_samples``
    points spanning ``u_span``. If Q or f fall below their floors the
    corresponding side stops early and the reason is recorded.

    Raises
    ------
    Inadmissible
        If Q(f0) <= 0.
    StepFailure
        If the integrator reports failure.
    """
    params.validate()
    c, C, f0 = params.c, params.C, params.f0
    u_lo, u_hi = map(float, u_span)
    if not u_lo <= 0.0 <= u_hi:
        raise InvalidParameters("u_span must contain 0")
    if u_lo == u_hi:
        return ProfileCurve(np.array([0.0]), np.array([f0]), np.array([slope(f0, c, C)]), params)

    grid = np.linspace(u_lo, u_hi, max(int(n_samples), 2))

    def rhs(u, y):
        f = max(y[0], F_FLOOR)
        return [4.0 / 3.0 * f * np.sqrt(max(radicand(f, c, C), 0.0))]

    us, fs, notes = [], [], []
    for side, end in (("lower", u_lo), ("upper", u_hi)):
        if end == 0.0:
            continue
        sol = solve_ivp(
            rhs, (0.0, end), [f0], method="DOP853", rtol=tol, atol=tol,
            dense_output=True, events=_halt_events(c, C),
        )
        if sol.status == -1:
            raise StepFailure(f"profile integration failed on the {side} side: {sol.message}")
        reached = sol.t[-1]
        pts = grid[(grid >= min(0.0, reached)) & (grid <= max(0.0, reached))]
        us.append(pts)
        fs.append(sol.sol(pts)[0])
        reason = _truncation_reason(sol, side)
        if reason:
            notes.append(reason)

    u = np.concatenate(us)
    f = np.concatenate(fs)
    order = np.argsort(u, kind="stable")
    u, f = u[order], f[order]
    keep = np.concatenate([[True], np.diff(u) > 0])
    u, f = u[keep], f[keep]
    fp = 4.0 / 3.0 * f * np.sqrt(np.maximum(radicand(f, c, C), 0.0))
    return ProfileCurve(u, f, fp, params, tuple(notes))


def second_order_residual(curve, n_resample=512):
    """Max |f f'' - 7/4 f'^2 + 4/3 f^2 + 4 f^4 + 4/3 c^2 f^5| over interior samples.

    f'' is taken by fourth-order centred differences of the f' samples, so
    the two samples nearest each end are excluded. Curves that are not
    uniformly sampled are first resampled at ``n_resample`` uniform points
    through the Hermite interpolant.
    """
    if len(curve) < 5:
        raise TooFewSamples("second_order_residual needs at least 5 samples")
    u, f, fp = curve.u, curve.f, curve.fprime
    du = np.diff(u)
    if not np.allclose(du, du[0], rtol=1e-9, atol=0.0):
        u = np.linspace(u[0], u[-1], n_resample)
        f, fp = curve(u), curve.derivative(u)
    h = (u[-1] - u[0]) / (len(u) - 1)
    fpp = (fp[:-4] - 8.0 * fp[1:-3] + 8.0 * fp[3:-1] - fp[4:]) / (12.0 * h)
    f, fp = f[2:-2], fp[2:-2]
    c = curve.params.c
    res = f * fpp - 1.75 * fp**2 + 4.0 / 3.0 * f**2 + 4.0 * f**4 + 4.0 / 3.0 * c**2 * f**5
    return float(np.max(np.abs(res)))


@dataclass(frozen=True)
class ScalarInvariants:
    """Gaussian curvature, curvature and torsion of the E1-curve in H^4,
    and the curvature of the E2-curves in R^5_1."""

    K: float
    kappa1: float
    kappa2: float
    kappahat: float


def invariants_at(f, params):
    c, C = params.c, params.C
    q = radicand(f, c, C)
    if np.any(q < 0):
        raise NegativeRadicand("Q(f) < 0")
    f = np.asarray(f, dtype=float)
    K = -1.0 - 3.0 * f**2 - c**2 * f**3
    kappa1 = f * np.sqrt(1.0 + c**2 * f)
    kappa2 = 2.0 * abs(c) * np.sqrt(f) / (3.0 * (1.0 + c**2 * f)) * np.sqrt(q)
    kappahat = 3.0 * np.sqrt(abs(C)) * f**0.75
    if f.ndim == 0:
        K, kappa1, kappa2, kappahat = map(float, (K, kappa1, kappa2, kappahat))
    return ScalarInvariants(K, kappa1, kappa2, kappahat)
