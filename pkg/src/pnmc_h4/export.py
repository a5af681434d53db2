"""Grid serialization: CSV, JSON and Wavefront OBJ.

CSV and JSON keep the hyperboloid coordinates (or their Poincare-ball
images) at 17 significant digits so that the readers below reconstruct a
grid exactly. OBJ is a viewing aid only and always uses three
Poincare-ball coordinates.
"""

import io
import json

import numpy as np

from . import minkowski as mk
from .errors import NotOnHyperboloid

MEMBERSHIP_TOL = 1e-7
CSV_COLUMNS = ("u", "t", "x1", "x2", "x3", "x4", "x5")


def project_poincare(x, tol=MEMBERSHIP_TOL):
    """Hyperboloid -> Poincare ball, ``y_i = x_i / (1 + x5)`` for i = 1..4.

    Raises
    ------
    NotOnHyperboloid
        If any point misses the upper sheet by more than ``tol``.
    """
    x = np.asarray(x, dtype=float)
    if not np.all(mk.on_hyperboloid(x, tol)):
        raise NotOnHyperboloid("Poincare projection needs points on the upper sheet <x, x> = -1")
    return x[..., :4] / (1.0 + x[..., 4:5])


def _fmt(v):
    return format(float(v), ".17g")


def _header_lines(meta):
    return [f"# {k} = {meta[k]}" for k in sorted(meta)]


def write_csv(stream, grid_points, u_values, t_values, meta=None, projection="none"):
    """One row per lattice point, u-major, columns ``u,t,x1..x5`` (``y1..y4`` if projected)."""
    pts = grid_points if projection == "none" else project_poincare(grid_points)
    names = CSV_COLUMNS if projection == "none" else ("u", "t", "y1", "y2", "y3", "y4")
    for line in _header_lines(dict(meta or {}, projection=projection)):
        stream.write(line + "\n")
    stream.write(",".join(names) + "\n")
    for i, u in enumerate(u_values):
        for j, t in enumerate(t_values):
            stream.write(",".join([_fmt(u), _fmt(t)] + [_fmt(v) for v in pts[i, j]]) + "\n")


def read_csv(stream):
    """Inverse of :func:`write_csv`; returns ``(points, u_values, t_values, meta)``."""
    meta, rows, header = {}, [], None
    for line in stream:
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            key, _, value = line[1:].partition("=")
            meta[key.strip()] = value.strip()
        elif header is None:
            header = line.split(",")
        else:
            rows.append([float(v) for v in line.split(",")])
    if header is None or header[:2] != ["u", "t"]:
        raise ValueError("CSV grid needs a 'u,t,...' header line")
    data = np.array(rows, dtype=float).reshape(-1, len(header))
    u_values = np.unique(data[:, 0])
    t_values = np.unique(data[:, 1])
    points = data[:, 2:].reshape(len(u_values), len(t_values), -1)
    return points, u_values, t_values, meta


def grid_to_dict(grid_points, u_values, t_values, meta=None, projection="none"):
    pts = grid_points if projection == "none" else project_poincare(grid_points)
    return {
        "metadata": dict(meta or {}, projection=projection),
        "u": [float(v) for v in u_values],
        "t": [float(v) for v in t_values],
        "points": np.asarray(pts, dtype=float).tolist(),
    }


def write_json(stream, grid_points, u_values, t_values, meta=None, projection="none"):
    # json writes floats with repr, which round-trips exactly
    json.dump(grid_to_dict(grid_points, u_values, t_values, meta, projection), stream, sort_keys=True)
    stream.write("\n")


def read_json(stream):
    doc = json.load(stream)
    return (np.array(doc["points"], dtype=float), np.array(doc["u"], dtype=float),
            np.array(doc["t"], dtype=float), doc["metadata"])


def write_obj(stream, grid_points, axes=(0, 1, 2), meta=None):
    """Quad mesh of the lattice in three of the four Poincare-ball coordinates."""
    y = project_poincare(grid_points)[..., list(axes)]
    nu, nt = y.shape[:2]
    for line in _header_lines(dict(meta or {}, projection="poincare", axes=",".join(str(a + 1) for a in axes))):
        stream.write(line + "\n")
    for v in y.reshape(-1, 3):
        stream.write("v " + " ".join(_fmt(c) for c in v) + "\n")
    idx = np.arange(nu * nt).reshape(nu, nt) + 1
    for i in range(nu - 1):
        for j in range(nt - 1):
            stream.write(f"f {idx[i, j]} {idx[i + 1, j]} {idx[i + 1, j + 1]} {idx[i, j + 1]}\n")


WRITERS = {"csv": write_csv, "json": write_json}


def render(fmt, grid_points, u_values, t_values, meta=None, projection="none", obj_axes=(0, 1, 2)):
    """Serialize to a string in one of ``csv``, ``json``, ``obj``."""
    out = io.StringIO()
    if fmt == "obj":
        if projection != "poincare":
            raise ValueError("OBJ export needs --projection poincare (it has three coordinates)")
        write_obj(out, grid_points, obj_axes, meta)
    elif fmt in WRITERS:
        WRITERS[fmt](out, grid_points, u_values, t_values, meta, projection)
    else:
        raise ValueError(f"unknown format {fmt!r}")
    return out.getvalue()
