"""Linear algebra in Minkowski space R^5_1.

The bilinear form is ``<x, y> = x1 y1 + x2 y2 + x3 y3 + x4 y4 - x5 y5``,
so the fifth coordinate is the timelike one. Vectors are plain numpy
arrays whose last axis has length 5; every function broadcasts over the
leading axes.

The hyperbolic space H^4 is the upper sheet ``<x, x> = -1, x5 > 0``.
"""

from enum import Enum

import numpy as np

from .errors import ZeroVector

DIM = 5

#: diagonal of the bilinear form, in coordinate order
SIGNATURE = np.array([1.0, 1.0, 1.0, 1.0, -1.0])

#: Gram matrix of an adapted frame (Phi, E1, E2, E3, E4)
FRAME_GRAM = np.diag([-1.0, 1.0, 1.0, 1.0, 1.0])

NULL_TOL = 1e-9


class CausalType(Enum):
    SPACELIKE = "spacelike"
    TIMELIKE = "timelike"
    NULL = "null"


def basis(i):
    """Standard basis vector e_i, 1-based as in the coordinate labels."""
    e = np.zeros(DIM)
    e[i - 1] = 1.0
    return e


def inner(x, y):
    """Minkowski inner product along the last axis."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return np.sum(x[..., :4] * y[..., :4], axis=-1) - x[..., 4] * y[..., 4]


def norm_sq(x):
    return inner(x, x)


def causal_type(x, tol=NULL_TOL):
    """Classify a single non-zero vector by the sign of ``<x, x>``.

    Raises
    ------
    ZeroVector
        If every component is below ``tol`` in absolute value.
    """
    x = np.asarray(x, dtype=float)
    if np.all(np.abs(x) <= tol):
        raise ZeroVector("cannot classify the zero vector")
    q = norm_sq(x)
    if q > tol:
        return CausalType.SPACELIKE
    if q < -tol:
        return CausalType.TIMELIKE
    return CausalType.NULL


def on_hyperboloid(x, tol=NULL_TOL):
    """True where ``|<x, x> + 1| <= tol`` and ``x5 > 0``."""
    x = np.asarray(x, dtype=float)
    return (np.abs(norm_sq(x) + 1.0) <= tol) & (x[..., 4] > 0)


def gram(frame):
    """Pairwise inner products of the rows of ``frame`` (shape ``(..., k, 5)``)."""
    frame = np.asarray(frame, dtype=float)
    return np.einsum("...id,d,...jd->...ij", frame, SIGNATURE, frame)


def gram_drift(frame):
    """Max-entry deviation of ``gram(frame)`` from diag(-1, 1, 1, 1, 1)."""
    return np.max(np.abs(gram(frame) - FRAME_GRAM), axis=(-2, -1))


def project_out(x, vectors):
    """Remove from ``x`` its components along mutually orthogonal non-null ``vectors``.

    Each vector may be spacelike or timelike; the coefficient is
    ``<x, v> / <v, v>`` so no normalization is assumed.
    """
    x = np.array(x, dtype=float)
    for v in vectors:
        v = np.asarray(v, dtype=float)
        coef = inner(x, v) / inner(v, v)
        x = x - coef[..., None] * v
    return x
