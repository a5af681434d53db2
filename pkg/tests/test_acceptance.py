"""Acceptance criteria 1 to 10, one test each, at the stated tolerances.

Each test records a ``criterion N: PASS|FAIL`` line (collected in the
terminal summary) and fails when the criterion does. Criteria 5 and 7
are red on purpose; the README explains why.
"""

import json
import time
import warnings

import numpy as np
import pytest

from pnmc_h4 import cli
from pnmc_h4 import minkowski as mk
from pnmc_h4 import verifier as V
from pnmc_h4.frame_flow import (
    constraint_residual,
    gram_drift_max,
    hyperboloid_residual,
    integrate_directrix,
)
from pnmc_h4.profile import ModuliParams, integrate_profile, second_order_residual
from pnmc_h4.surface import SurfaceParams, generate_grid, membership_residual

from conftest import EXAMPLES, SWEEP_SETS
from oracles import cylinder, geodesic_plane

TOL = 1e-10
SPAN = (-0.5, 0.5)
FD_CHECKS = ("mean_curvature_match", "shape_A3", "shape_A4", "biconservative", "pnmc", "gauss_K")


@pytest.fixture(scope="module")
def directrices():
    return {(c, C): integrate_directrix(ModuliParams(c, C, f0), SPAN, tol=TOL) for c, C, f0 in SWEEP_SETS}


@pytest.fixture(scope="module")
def grids():
    out = {}
    for name, m in EXAMPLES.items():
        g = generate_grid(SurfaceParams(ModuliParams(*m), nu=64, nt=64, tol=TOL))
        out[name] = (g, integrate_profile(g.params.moduli, g.directrix.span, tol=TOL))
    return out


def test_criterion_1_first_integral(criterion):
    worst = max(second_order_residual(integrate_profile(ModuliParams(c, C, f0), SPAN, tol=TOL))
                for c, C, f0 in SWEEP_SETS)
    criterion(1, worst <= 1e-6, f"max second-order residual {worst:.3e} (tol 1e-6) over 6 (c, C)")


def test_criterion_2_frame_fidelity(criterion, directrices):
    drift = max(gram_drift_max(d) for d in directrices.values())
    hyp = max(hyperboloid_residual(d) for d in directrices.values())
    criterion(2, drift <= 1e-6 and hyp <= 1e-8, f"gram drift {drift:.3e} (tol 1e-6), |<Phi,Phi>+1| {hyp:.3e} (tol 1e-8)")


def test_criterion_3_axis_constraints(criterion):
    res = {k: constraint_residual(integrate_directrix(ModuliParams(*m), SPAN, tol=TOL)) for k, m in EXAMPLES.items()}
    detail = ", ".join(f"{k} {v:.3e}" for k, v in res.items())
    criterion(3, max(res.values()) <= 1e-7, f"constraint residual {detail} (tol 1e-7)")


def test_criterion_4_membership(criterion, grids):
    res = {k: membership_residual(g.points) for k, (g, _) in grids.items()}
    detail = ", ".join(f"{k} {v:.3e}" for k, v in res.items())
    criterion(4, max(res.values()) <= 1e-7, f"64x64 membership {detail} (tol 1e-7)")


def _fd_residuals(grid, profile, h):
    rep = V.verify_grid(grid, profile, h=h, richardson_fallback=False)
    return {k: rep[k].residual for k in FD_CHECKS}, rep


def test_criterion_5_independent_verification(criterion, grids):
    limits = {"mean_curvature_match": 1e-4, "shape_A3": 1e-3, "shape_A4": 1e-3,
              "biconservative": 1e-3, "pnmc": 1e-3, "gauss_K": 1e-3}
    within, ratios, worst = True, [], dict.fromkeys(FD_CHECKS, 0.0)
    for g, prof in grids.values():
        coarse, _ = _fd_residuals(g, prof, 1e-3)
        fine, _ = _fd_residuals(g, prof, 5e-4)
        for k in FD_CHECKS:
            worst[k] = max(worst[k], coarse[k])
            within &= coarse[k] <= limits[k]
            ratios.append(coarse[k] / fine[k])
    converged = min(ratios) >= 8
    detail = (", ".join(f"{k} {v:.2e}" for k, v in worst.items())
              + f" at h=1e-3 ({'within' if within else 'OUTSIDE'} tolerance); "
              f"drop from h=1e-3 to 5e-4 min {min(ratios):.2f}x max {max(ratios):.2f}x (needs >= 8x)")
    criterion(5, within and converged, detail)


def test_criterion_6_conic_trichotomy(criterion, grids):
    expected = {"parabolic": V.Conic.PARABOLA, "circular": V.Conic.CIRCLE, "hyperbolic": V.Conic.HYPERBOLA}
    ok, planar, kappa = True, 0.0, 0.0
    for name, (g, prof) in grids.items():
        c, C, _ = EXAMPLES[name]
        for i, u0 in enumerate(g.u_values):
            cl = V.classify_e2_curve(g.points[i])
            ok &= cl.case is expected[name]
            planar = max(planar, cl.planarity_residual)
            if C > 0:
                kappa = max(kappa, abs(cl.kappa_hat - 3 * np.sqrt(C) * float(prof(u0)) ** 0.75))
    criterion(6, ok and planar <= 1e-8 and kappa <= 1e-5,
              f"classes {'match' if ok else 'MISMATCH'} sign(C) on 3x64 rows, planarity {planar:.3e} (tol 1e-8), "
              f"kappa_hat error {kappa:.3e} (tol 1e-5)")


def test_criterion_7_oracles(criterion):
    cyl = V.fundamental_forms(cylinder, 0.3, 0.2)
    f_cyl, K_cyl = V.mean_curvature(cyl)[1], V.extrinsic_gauss_curvature(cyl)
    plane = V.fundamental_forms(geodesic_plane, 0.3, -0.2)
    f_pl, K_pl = V.mean_curvature(plane)[1], V.extrinsic_gauss_curvature(plane)
    target = np.sqrt(7 / 8)
    ok = (abs(f_cyl - target) <= 1e-6 and abs(K_cyl) <= 1e-6
          and abs(f_pl) <= 1e-8 and abs(K_pl + 1) <= 1e-8)
    criterion(7, ok, f"cylinder f {f_cyl:.9f} vs sqrt(7/8) = {target:.9f} (tol 1e-6; analytic value is "
                     f"sqrt(9/8) = {np.sqrt(9 / 8):.9f}), K {K_cyl:.2e}; H^2 f {f_pl:.2e}, K+1 {K_pl + 1:.2e}")


def test_criterion_8_nonplanarity(criterion, directrices):
    dir_min, e2_max, used = np.inf, 0.0, 0
    for (c, C), d in directrices.items():
        if d.f.max() / d.f.min() < 1.1:
            continue
        used += 1
        dir_min = min(dir_min, V.nonplanarity_report(d.sigma_samples).ratio)
        f0 = d.params.f0
        g = generate_grid(SurfaceParams(ModuliParams(c, C, f0), nu=16, nt=33, tol=TOL))
        e2_max = max(e2_max, max(V.planarity_ratio(row) for row in g.points))
    criterion(8, used > 0 and dir_min >= 1e-4 and e2_max <= 1e-8,
              f"{used} runs with f varying >= 10%: directrix sigma3/sigma1 min {dir_min:.3e} (>= 1e-4), "
              f"E2-curve max {e2_max:.3e} (<= 1e-8)")


def test_criterion_9_negative_controls(criterion, grids):
    caught = []
    for name, (g, prof) in grids.items():
        # raw perturbation, and the same perturbation pushed back onto H^4
        for label in ("raw", "renormalized"):
            P = g.points.copy()
            P[31, 30, 0] += 1e-2
            if label == "renormalized":
                P[31, 30] /= np.sqrt(-mk.norm_sq(P[31, 30]))
            caught.append((f"{name}/{label}", V.verify_grid(g.with_points(P), prof).failures()))
    geo = V.local_geometry(cylinder, 0.3, 0.2)
    shape = V.check_shape_and_biconservative(geo.forms, geo.f, 1.0, geo.grad_f)
    ok = all(f for _, f in caught) and shape.shape_A3 > V.TOLERANCES["shape_A3"]
    detail = "; ".join(f"{n} fails {','.join(f) or 'NOTHING'}" for n, f in caught)
    criterion(9, ok, f"{detail}; cylinder shape_A3 {float(shape.shape_A3):.3f} (> 1e-3)")


def test_criterion_10_cli(criterion, tmp_path, capsys):
    base = ["--c", "1", "--C", "0", "--f0", "0.2"]
    codes = {
        "generate": cli.main(["generate", *base, "--out", str(tmp_path / "a.csv")]),
        "c=0": cli.main(["generate", "--c", "0", "--C", "0", "--f0", "0.2"]),
        "f0=0.5": cli.main(["generate", "--c", "1", "--C", "0", "--f0", "0.5"]),
        "io": cli.main(["generate", *base, "--out", str(tmp_path / "no" / "x.csv")]),
        "verify": cli.main(["verify", *base, "--out", str(tmp_path / "r.txt")]),
        "verify-fail": cli.main(["verify", *base, "--fd-step", "1e-7", "--nu", "16", "--nt", "16"]),
    }
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        codes["integrator"] = cli.main(["generate", *base, "--tol", "1e-300", "--nu", "8", "--nt", "8"])
    want = {"generate": 0, "c=0": 2, "f0=0.5": 2, "io": 4, "verify": 0, "verify-fail": 5, "integrator": 3}
    cli.main(["generate", *base, "--out", str(tmp_path / "b.csv")])
    same = (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    rows = sum(1 for ln in (tmp_path / "a.csv").read_text().splitlines() if ln[:1] not in ("#", "u"))
    t0 = time.perf_counter()
    sweep_code = cli.main(["sweep", "--out", str(tmp_path / "sweep.json")])
    elapsed = time.perf_counter() - t0
    points = json.loads((tmp_path / "sweep.json").read_text())["points"]
    capsys.readouterr()
    status = {s: sum(p["status"] == s for p in points) for s in ("pass", "fail", "error")}
    ok = (codes == want and same and rows == 4096 and sweep_code == 0 and len(points) == 25
          and [(p["c"], p["C"]) for p in points] == sorted((p["c"], p["C"]) for p in points) and elapsed < 300)
    criterion(10, ok, f"exit codes {codes} (want {want}), byte-identical {same}, {rows} CSV rows, "
                      f"5x5 sweep {elapsed:.1f}s (< 300s) {status}")
