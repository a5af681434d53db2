"""Finite-difference recomputation of surface geometry from point samples.

Nothing here reads frames or profiles from the construction path: every
quantity is rebuilt from a sampler ``(u, t) -> Phi`` returning points of
R^5_1 (broadcasting over array arguments). Derivatives use fourth-order
centred stencils on a 5 x 5 lattice around each point.

Conventions: the tangent frame has ``e2`` along the t-coordinate line and
``e1`` completing it; ``B_Phi`` is the part of the second derivative of
Phi normal to the surface in R^5_1, and the second fundamental form in
H^4 is ``B(X, Y) = B_Phi(X, Y) - <X, Y> Phi``.
"""

import enum
from dataclasses import dataclass, field

import numpy as np

from . import minkowski as mk
from .errors import (
    DegenerateMetric,
    NegativeNormSquared,
    OutOfSpan,
    StencilOutOfDomain,
    TooFewSamples,
    ZeroMeanCurvature,
)

FD_STEP = 1e-3
OFFSETS = np.arange(-2, 3)
# furthest sample from a checked point, in steps: the stencil around each of the +-2 neighbours
REACH = 4
D1 = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0
D2 = np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / 12.0
# sixth-order centred stencils for the 7-point curve classifier
C1 = np.array([-1.0, 9.0, -45.0, 0.0, 45.0, -9.0, 1.0]) / 60.0
C2 = np.array([2.0, -27.0, 270.0, -490.0, 270.0, -27.0, 2.0]) / 180.0

DET_FLOOR = 1e-12
NORM_TOL = 1e-10
GRAD_FLOOR = 1e-6

TOLERANCES = {
    "hyperboloid": 1e-7,
    "mean_curvature_match": 1e-4,
    "shape_A3": 1e-3,
    "shape_A4": 1e-3,
    "biconservative": 1e-3,
    "pnmc": 1e-3,
    "gauss_K": 1e-3,
    "e2f_zero": 1e-5,
    "conic_planarity": 1e-8,
    "conic_kappa": 1e-5,
}


def _steps(h):
    hu, ht = (h, h) if np.isscalar(h) else h
    if hu <= 0 or ht <= 0:
        raise ValueError("finite-difference steps must be positive")
    return float(hu), float(ht)


def _sample(sampler, U, T):
    try:
        P = np.asarray(sampler(U, T), dtype=float)
    except OutOfSpan as exc:
        raise StencilOutOfDomain(str(exc)) from exc
    if not np.all(np.isfinite(P)):
        raise StencilOutOfDomain("sampler returned non-finite values on the stencil")
    return P


def _coordinate_derivatives(sampler, u, t, hu, ht):
    u = np.asarray(u, dtype=float)[..., None, None]
    t = np.asarray(t, dtype=float)[..., None, None]
    U = u + OFFSETS[:, None] * hu
    T = t + OFFSETS[None, :] * ht
    P = _sample(sampler, *np.broadcast_arrays(U, T))  # (..., 5, 5, 5): iu, it, component
    row, col = P[..., :, 2, :], P[..., 2, :, :]
    d = {
        "P": P[..., 2, 2, :],
        "Pu": np.einsum("i,...id->...d", D1, row) / hu,
        "Pt": np.einsum("j,...jd->...d", D1, col) / ht,
        "Puu": np.einsum("i,...id->...d", D2, row) / hu**2,
        "Ptt": np.einsum("j,...jd->...d", D2, col) / ht**2,
    }
    # the two orders of the mixed stencil differ only in summation order
    d["Put"] = np.einsum("i,...id->...d", D1, np.einsum("j,...ijd->...id", D1, P)) / (hu * ht)
    d["Ptu"] = np.einsum("j,...jd->...d", D1, np.einsum("i,...ijd->...jd", D1, P)) / (hu * ht)
    return d


@dataclass(frozen=True)
class FundamentalForms:
    """Recomputed first and second fundamental forms at one or more points.

    All fields carry the batch shape of the query points in front.
    ``alpha, beta, delta`` express the orthonormal frame in coordinate
    vectors: ``e1 = alpha Phi_u + beta Phi_t`` and ``e2 = delta Phi_t``.
    """

    point: np.ndarray
    g: np.ndarray
    e1: np.ndarray
    e2: np.ndarray
    n3: np.ndarray
    n4: np.ndarray
    B11: np.ndarray
    B12: np.ndarray
    B22: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray
    delta: np.ndarray
    b12_asymmetry: np.ndarray = field(repr=False)


def _normal_frame(phi, e1, e2):
    """Two orthonormal spacelike vectors orthogonal to Phi, e1, e2.

    Gram-Schmidt on the coordinate vectors, taking at each stage the
    candidate with the largest remaining norm.
    """
    cand = np.broadcast_to(np.eye(5), phi.shape[:-1] + (5, 5)).copy()
    cand = mk.project_out(cand, [phi[..., None, :], e1[..., None, :], e2[..., None, :]])
    frame = []
    for _ in range(2):
        q = mk.norm_sq(cand)
        k = np.argmax(q, axis=-1)
        n = np.take_along_axis(cand, k[..., None, None], axis=-2)[..., 0, :]
        n = n / np.sqrt(mk.norm_sq(n))[..., None]
        frame.append(n)
        cand = mk.project_out(cand, [n[..., None, :]])
    return frame


def _forms(d):
    P, Pu, Pt = d["P"], d["Pu"], d["Pt"]
    g11, g12, g22 = mk.inner(Pu, Pu), mk.inner(Pu, Pt), mk.inner(Pt, Pt)
    det = g11 * g22 - g12**2
    if np.any(det <= DET_FLOOR) or np.any(g22 <= 0):
        raise DegenerateMetric("induced metric is degenerate on the stencil")
    g = np.stack([np.stack([g11, g12], -1), np.stack([g12, g22], -1)], -2)
    delta = 1.0 / np.sqrt(g22)
    alpha = np.sqrt(g22 / det)
    beta = -g12 / g22 * alpha
    col = lambda a: np.asarray(a)[..., None]
    e2 = col(delta) * Pt
    e1 = col(alpha) * Pu + col(beta) * Pt

    Puu, Put, Ptt = d["Puu"], d["Put"], d["Ptt"]
    S11 = col(alpha**2) * Puu + col(2 * alpha * beta) * Put + col(beta**2) * Ptt
    S12 = col(alpha * delta) * Put + col(beta * delta) * Ptt
    S22 = col(delta**2) * Ptt
    tangent_free = lambda x: x - col(mk.inner(x, e1)) * e1 - col(mk.inner(x, e2)) * e2
    B11 = tangent_free(S11) - P
    B12 = tangent_free(S12)
    B22 = tangent_free(S22) - P
    S12_alt = col(alpha * delta) * d["Ptu"] + col(beta * delta) * Ptt
    asym = np.max(np.abs(tangent_free(S12_alt) - B12), axis=-1)

    n3, n4 = _normal_frame(P, e1, e2)
    return FundamentalForms(P, g, e1, e2, n3, n4, B11, B12, B22, alpha, beta, delta, asym)


def fundamental_forms(sampler, u, t, h=FD_STEP, richardson=False):
    """Fundamental forms of the sampled immersion at ``(u, t)``.

    ``h`` is one step for both coordinates or a pair ``(hu, ht)``. With
    ``richardson`` the coordinate derivatives from steps h and h/2 are
    combined as ``(16 D(h/2) - D(h)) / 15``.

    Raises
    ------
    StencilOutOfDomain
        If the sampler cannot be evaluated on the 5 x 5 stencil.
    DegenerateMetric
        If det g <= 1e-12.
    """
    hu, ht = _steps(h)
    d = _coordinate_derivatives(sampler, u, t, hu, ht)
    if richardson:
        dh = _coordinate_derivatives(sampler, u, t, hu / 2, ht / 2)
        d = {k: v if k == "P" else (16.0 * dh[k] - v) / 15.0 for k, v in d.items()}
    return _forms(d)


def mean_curvature(ff):
    """Mean curvature vector H = (B11 + B22) / 2 and f = |H|."""
    H = 0.5 * (ff.B11 + ff.B22)
    q = mk.norm_sq(H)
    if np.any(q < -NORM_TOL):
        raise NegativeNormSquared("<H, H> < 0: the recomputed normal frame is inconsistent")
    f = np.sqrt(np.maximum(q, 0.0))
    return H, (float(f) if np.ndim(f) == 0 else f)


def extrinsic_gauss_curvature(ff):
    """K = -1 + <B11, B22> - <B12, B12> (Gauss equation in H^4)."""
    K = -1.0 + mk.inner(ff.B11, ff.B22) - mk.inner(ff.B12, ff.B12)
    return float(K) if np.ndim(K) == 0 else K


def check_gauss(ff, f, c):
    """|K_extr - (-1 - 3 f^2 - c^2 f^3)|."""
    res = np.abs(extrinsic_gauss_curvature(ff) - (-1.0 - 3.0 * np.asarray(f) ** 2 - c**2 * np.asarray(f) ** 3))
    return float(res) if np.ndim(res) == 0 else res


# neighbours used for first derivatives of f and of H/f: centre, then u and t offsets
_NEIGHBOURS = [(0, 0)] + [(k, 0) for k in (-2, -1, 1, 2)] + [(0, k) for k in (-2, -1, 1, 2)]


def _neighbourhood(sampler, u, t, h, richardson=False):
    """Forms at the centre and at the eight axial neighbours (batch axis -1)."""
    hu, ht = _steps(h)
    du = np.array([a for a, _ in _NEIGHBOURS]) * hu
    dt = np.array([b for _, b in _NEIGHBOURS]) * ht
    U = np.asarray(u, dtype=float)[..., None] + du
    T = np.asarray(t, dtype=float)[..., None] + dt
    return fundamental_forms(sampler, U, T, (hu, ht), richardson=richardson)


_AXIAL = np.array([1.0, -8.0, 8.0, -1.0]) / 12.0


def _axial_derivative(values, h, axis=-1):
    """d/du and d/dt at the centre from neighbour values laid out as _NEIGHBOURS.

    ``axis`` is the neighbour axis of ``values``.
    """
    hu, ht = _steps(h)
    v = np.moveaxis(values, axis, -1)
    du = v[..., 1:5] @ _AXIAL / hu
    dt = v[..., 5:9] @ _AXIAL / ht
    return du, dt


def _take(ff, i):
    """Select neighbour ``i`` from forms whose batch shape ends in the neighbour axis."""
    batch = np.ndim(ff.alpha)
    parts = {}
    for name in FundamentalForms.__dataclass_fields__:
        a = np.asarray(getattr(ff, name))
        parts[name] = np.moveaxis(a, batch - 1, 0)[i]
    return FundamentalForms(**parts)


@dataclass(frozen=True)
class LocalGeometry:
    """Everything the pointwise checks need at a batch of points."""

    forms: FundamentalForms
    H: np.ndarray
    f: np.ndarray
    grad_f: np.ndarray  # components (e1 f, e2 f) in the centre frame
    pnmc: np.ndarray


def local_geometry(sampler, u, t, h=FD_STEP, richardson=False):
    """Centre forms, f, grad f and the PNMC residual from one batched evaluation."""
    nb = _neighbourhood(sampler, u, t, h, richardson)
    H, f = mean_curvature(nb)
    f = np.asarray(f)
    if np.any(f <= 0):
        raise ZeroMeanCurvature("f vanishes on the stencil")
    ff = _take(nb, 0)
    fu, ft = _axial_derivative(f, h)
    grad = np.stack([ff.alpha * fu + ff.beta * ft, ff.delta * ft], axis=-1)

    E3 = H / f[..., None]
    Eu, Et = _axial_derivative(E3, h, axis=-2)
    col = lambda a: np.asarray(a)[..., None]
    d1 = col(ff.alpha) * Eu + col(ff.beta) * Et
    d2 = col(ff.delta) * Et
    normal_part = lambda x: np.sqrt(mk.inner(x, ff.n3) ** 2 + mk.inner(x, ff.n4) ** 2)
    pnmc = np.maximum(normal_part(d1), normal_part(d2))
    return LocalGeometry(ff, H[..., 0, :], f[..., 0], grad, pnmc)


def mean_curvature_gradient(sampler, u, t, h=FD_STEP):
    """(e1 f, e2 f) at ``(u, t)`` by differentiating the recomputed f."""
    return local_geometry(sampler, u, t, h).grad_f


def check_pnmc(sampler, u, t, h=FD_STEP):
    """Largest normal component of the derivatives of E3 = H/f along e1 and e2."""
    r = local_geometry(sampler, u, t, h).pnmc
    return float(r) if np.ndim(r) == 0 else r


@dataclass(frozen=True)
class ShapeCheck:
    A3: np.ndarray
    A4: np.ndarray
    shape_A3: np.ndarray
    shape_A4: np.ndarray
    biconservative: np.ndarray
    a4_determinant: np.ndarray


def _matrix(Bs, n):
    b11, b12, b22 = (mk.inner(B, n) for B in Bs)
    return np.stack([np.stack([b11, b12], -1), np.stack([b12, b22], -1)], -2)


def check_shape_and_biconservative(ff, f, c, grad_f):
    """Compare the shape operators with diag(-f, 3f) and diag(c f^1.5, -c f^1.5).

    The tangent frame is first rotated so that e1 points along ``grad_f``
    (given as components in ``ff``'s frame). Where grad f vanishes the
    frame is aligned with the eigenvectors of A3 instead, smaller
    eigenvalue first. E4 is the unit normal orthogonal to E3 = H/f whose
    sign makes ``A4[0, 0]`` share the sign of ``c``.
    """
    f = np.asarray(f, dtype=float)
    if np.any(f <= 0):
        raise ZeroMeanCurvature("E3 = H/f needs f > 0")
    col = lambda a: np.asarray(a)[..., None]
    Bs = (ff.B11, ff.B12, ff.B22)
    n3 = 0.5 * (ff.B11 + ff.B22) / col(f)
    cand = mk.project_out(np.stack([ff.n3, ff.n4], -2), [n3[..., None, :]])
    k = np.argmax(mk.norm_sq(cand), axis=-1)
    n4 = np.take_along_axis(cand, k[..., None, None], axis=-2)[..., 0, :]
    n4 = n4 / np.sqrt(mk.norm_sq(n4))[..., None]

    A3 = _matrix(Bs, n3)
    grad_f = np.asarray(grad_f, dtype=float)
    gnorm = np.linalg.norm(grad_f, axis=-1)
    _, vecs = np.linalg.eigh(A3)
    along = np.where(col(gnorm > GRAD_FLOOR), grad_f / col(np.maximum(gnorm, 1e-300)), vecs[..., :, 0])
    R = np.stack([along, np.stack([-along[..., 1], along[..., 0]], -1)], -2)  # rows: new e1, e2
    rot = lambda A: R @ A @ np.swapaxes(R, -1, -2)
    A3 = rot(A3)
    A4 = rot(_matrix(Bs, n4))
    flip = np.where(np.sign(A4[..., 0, 0]) * np.sign(c) < 0, -1.0, 1.0)
    A4 = A4 * flip[..., None, None]

    zero = np.zeros_like(f)
    target3 = np.stack([np.stack([-f, zero], -1), np.stack([zero, 3 * f], -1)], -2)
    cf = c * f**1.5
    target4 = np.stack([np.stack([cf, zero], -1), np.stack([zero, -cf], -1)], -2)
    g_rot = (R @ grad_f[..., None])[..., 0]
    bicons = np.linalg.norm((A3 @ g_rot[..., None])[..., 0] + col(f) * g_rot, axis=-1)
    return ShapeCheck(
        A3=A3,
        A4=A4,
        shape_A3=np.linalg.norm(A3 - target3, axis=(-2, -1)),
        shape_A4=np.linalg.norm(A4 - target4, axis=(-2, -1)),
        biconservative=bicons,
        a4_determinant=np.abs(np.linalg.det(A4) + c**2 * f**3),
    )


class Conic(enum.Enum):
    PARABOLA = "Parabola"
    CIRCLE = "Circle"
    HYPERBOLA = "Hyperbola"


_CONIC_OF = {
    mk.CausalType.NULL: Conic.PARABOLA,
    mk.CausalType.SPACELIKE: Conic.CIRCLE,
    mk.CausalType.TIMELIKE: Conic.HYPERBOLA,
}


def planarity_ratio(samples):
    """sigma_3 / sigma_1 of the centred sample matrix (0 for points in a 2-plane)."""
    sv = singular_values(samples)
    return float(sv[2] / sv[0]) if len(sv) > 2 else 0.0


def singular_values(samples):
    X = np.asarray(samples, dtype=float)
    return np.linalg.svd(X - X.mean(axis=0), compute_uv=False)


@dataclass(frozen=True)
class NonPlanarityReport:
    singular_values: np.ndarray
    ratio: float


def nonplanarity_report(samples):
    sv = singular_values(samples)
    return NonPlanarityReport(sv, float(sv[2] / sv[0]) if len(sv) > 2 else 0.0)


@dataclass(frozen=True)
class ConicClassification:
    planarity_residual: float
    accel_type: mk.CausalType
    case: Conic
    kappa_hat: float


def classify_e2_curve(samples, tol=mk.NULL_TOL):
    """Classify a uniformly sampled curve t -> Phi(u0, t).

    Velocity and acceleration come from 7-point centred stencils at the
    middle sample, in units of the sample index; curvature
    ``|a_perp| / <v, v>`` does not depend on that scale. The causal type of
    the (Euclidean-normalized) acceleration decides the conic.
    """
    X = np.asarray(samples, dtype=float)
    if len(X) < 7:
        raise TooFewSamples("classify_e2_curve needs at least 7 samples")
    m = len(X) // 2
    window = X[m - 3:m + 4]
    v = C1 @ window
    a = C2 @ window
    a_hat = a / np.linalg.norm(a)
    accel_type = mk.causal_type(a_hat, tol)
    a_perp = a - mk.inner(a, v) / mk.inner(v, v) * v
    kappa = np.sqrt(abs(mk.norm_sq(a_perp))) / mk.inner(v, v)
    return ConicClassification(planarity_ratio(X), accel_type, _CONIC_OF[accel_type], float(kappa))


def lattice_sampler(grid):
    """Sampler that only answers on the grid's own (uniform) lattice."""
    u0, t0 = grid.u_values[0], grid.t_values[0]
    du = grid.u_values[1] - grid.u_values[0]
    dt = grid.t_values[1] - grid.t_values[0]
    nu, nt = grid.shape

    def sample(u, t):
        i = np.rint((np.asarray(u) - u0) / du).astype(int)
        j = np.rint((np.asarray(t) - t0) / dt).astype(int)
        if np.any((i < 0) | (i >= nu) | (j < 0) | (j >= nt)):
            raise StencilOutOfDomain("stencil leaves the grid")
        return grid.points[i, j]

    return sample, (du, dt)


def check_e2f_constant(grid):
    """Spread of the recomputed f along each t-row, maximized over rows.

    f is rebuilt by finite differences on the grid lattice itself, so a
    corrupted grid point shows up; rows and columns within two steps of the
    border are skipped because the stencil needs them.
    """
    nu, nt = grid.shape
    if nt < 5 or nu < 5:
        raise TooFewSamples("check_e2f_constant needs at least 5 samples in u and in t")
    sampler, steps = lattice_sampler(grid)
    U, T = np.meshgrid(grid.u_values[2:-2], grid.t_values[2:-2], indexing="ij")
    _, f = mean_curvature(fundamental_forms(sampler, U, T, steps))
    f = np.atleast_2d(f)
    return float(np.max(f.max(axis=1) - f.min(axis=1)))


@dataclass(frozen=True)
class CheckResult:
    name: str
    residual: float
    tolerance: float
    passed: bool
    refined: bool = False


@dataclass(frozen=True)
class CheckReport:
    checks: list
    conics: list = field(default_factory=list)
    conic_rows: list = field(default_factory=list)

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    def __getitem__(self, name):
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def failures(self):
        return [c.name for c in self.checks if not c.passed]

    def to_text(self):
        lines = []
        for c in self.checks:
            flag = "PASS" if c.passed else "FAIL"
            note = " (richardson)" if c.refined else ""
            lines.append(f"{c.name} = {c.residual:.6e} tol {c.tolerance:.1e} {flag}{note}")
        if self.conics:
            kinds = sorted({cl.case.value for cl in self.conics})
            lines.append(f"conic_case = {','.join(kinds)} over {len(self.conics)} rows")
        return "\n".join(lines) + "\n"

    def to_dict(self):
        return {
            "checks": {c.name: {"residual": c.residual, "tolerance": c.tolerance, "pass": c.passed}
                       for c in self.checks},
            "conic_class": [cl.case.value for cl in self.conics],
            "passed": self.passed,
        }


POINTWISE_CHECKS = ("mean_curvature_match", "shape_A3", "shape_A4", "biconservative", "pnmc", "gauss_K")


def _check_indices(n, k):
    return np.unique(np.linspace(0, n - 1, min(k, n)).round().astype(int))


def verify_grid(grid, profile, h=FD_STEP, points_per_axis=8, tolerances=None, richardson_fallback=True):
    """Run every check on a generated grid and collect a :class:`CheckReport`.

    ``profile`` is the reference f(u) (a callable) against which the
    recomputed mean curvature is compared; only ``c`` and ``C`` are taken
    from the grid parameters. Pointwise checks run on a sub-lattice of
    ``points_per_axis`` squared grid points. A residual within a factor 10
    of its tolerance is recomputed once with Richardson-combined stencils.
    """
    tol = dict(TOLERANCES, **(tolerances or {}))
    c, C = grid.params.moduli.c, grid.params.moduli.C
    sampler = grid.sampler
    iu = _check_indices(len(grid.u_values), points_per_axis)
    it = _check_indices(len(grid.t_values), points_per_axis)
    U, T = np.meshgrid(grid.u_values[iu], grid.t_values[it], indexing="ij")
    f_ref = profile(U)

    def pointwise(richardson):
        geo = local_geometry(sampler, U, T, h, richardson)
        shape = check_shape_and_biconservative(geo.forms, geo.f, c, geo.grad_f)
        return {
            "mean_curvature_match": float(np.max(np.abs(geo.f - f_ref))),
            "shape_A3": float(np.max(shape.shape_A3)),
            "shape_A4": float(np.max(shape.shape_A4)),
            "biconservative": float(np.max(shape.biconservative)),
            "pnmc": float(np.max(geo.pnmc)),
            "gauss_K": float(np.max(check_gauss(geo.forms, geo.f, c))),
        }

    # a grid far enough off the surface can break the recomputed frame; that is a failure, not a crash
    try:
        values = pointwise(False)
    except ArithmeticError:
        values = dict.fromkeys(POINTWISE_CHECKS, np.inf)
    refined = set()
    if richardson_fallback and all(np.isfinite(list(values.values()))) and any(
            v > tol[k] / 10 for k, v in values.items()):
        better = pointwise(True)
        for k, v in values.items():
            if v > tol[k] / 10:
                values[k] = better[k]
                refined.add(k)

    checks = [CheckResult("hyperboloid", _membership(grid.points), tol["hyperboloid"],
                          _membership(grid.points) <= tol["hyperboloid"])]
    for k, v in values.items():
        checks.append(CheckResult(k, v, tol[k], v <= tol[k], k in refined))
    try:
        e2f = check_e2f_constant(grid)
    except ArithmeticError:
        e2f = np.inf
    checks.append(CheckResult("e2f_zero", e2f, tol["e2f_zero"], e2f <= tol["e2f_zero"]))

    expected = {0: Conic.PARABOLA, 1: Conic.CIRCLE, -1: Conic.HYPERBOLA}[int(np.sign(C))]
    conics, rows, kappa_err = [], [], 0.0
    if len(grid.t_values) >= 7:
        for i, u0 in enumerate(grid.u_values):
            cl = classify_e2_curve(grid.points[i])
            conics.append(cl)
            rows.append(float(u0))
            if C != 0:
                kappa_err = max(kappa_err, abs(cl.kappa_hat - 3.0 * np.sqrt(abs(C)) * float(profile(u0)) ** 0.75))
        planarity = max(cl.planarity_residual for cl in conics)
        right_kind = all(cl.case is expected for cl in conics)
        checks.append(CheckResult("conic_class", planarity, tol["conic_planarity"],
                                  right_kind and planarity <= tol["conic_planarity"]))
        if C != 0:
            checks.append(CheckResult("conic_kappa", kappa_err, tol["conic_kappa"], kappa_err <= tol["conic_kappa"]))
    return CheckReport(checks, conics, rows)


def _membership(points):
    return float(np.max(np.abs(mk.norm_sq(points) + 1.0)))
