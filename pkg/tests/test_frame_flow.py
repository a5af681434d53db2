import numpy as np
import pytest

from pnmc_h4 import minkowski as mk
from pnmc_h4.errors import DriftExceeded, Inadmissible, NegativeRadicand, NonPositiveF, OutOfSpan
from pnmc_h4.frame_flow import (
    Case,
    FrameState,
    accel_norm_residual,
    axis_targets,
    b1_orthogonality,
    canonical_initial_frame,
    constraint_residual,
    e2_constancy,
    extract_axes,
    frame_derivative,
    gram_drift_max,
    hyperboloid_residual,
    integrate_directrix,
    xi_field,
    xi_propagation_residual,
)
from pnmc_h4.profile import ModuliParams, integrate_profile
from pnmc_h4.verifier import nonplanarity_report

from conftest import SWEEP_SETS
from oracles import frame_rhs_symbolic


def test_canonical_frame():
    s = canonical_initial_frame(0.2)
    np.testing.assert_array_equal(mk.gram(s.frame), mk.FRAME_GRAM)
    assert mk.on_hyperboloid(s.Phi)
    assert mk.inner(s.E2, s.Phi) == 0.0
    with pytest.raises(NonPositiveF):
        canonical_initial_frame(0.0)


def test_frame_derivative_table():
    s = canonical_initial_frame(0.2)
    fp, d = frame_derivative(s, 1.0, 0.0)
    assert fp == pytest.approx(4 / 3 * 0.2 * np.sqrt(0.632))
    np.testing.assert_allclose(d[3], [0.2, 0, 0, 0, 0])
    np.testing.assert_array_equal(d[2], 0.0)
    np.testing.assert_array_equal(d[0], s.E1)
    with pytest.raises(NegativeRadicand):
        frame_derivative(canonical_initial_frame(0.5), 1.0, 0.0)


def test_frame_derivative_on_random_state():
    rng = np.random.default_rng(3)
    s = FrameState.from_frame(0.4, 0.1, rng.normal(size=(5, 5)))
    _, d = frame_derivative(s, 2.0, -1.0)
    np.testing.assert_array_equal(d[0], s.E1)
    np.testing.assert_array_equal(d[2], 0.0)
    np.testing.assert_allclose(d[1], s.Phi - 0.1 * s.E3 + 2 * 0.1**1.5 * s.E4)


def test_xi_transport_identity_symbolic():
    # w' = sqrt(Q) w, so w / kappa_hat is constant and w scales like f^(3/4) when C = 0
    assert frame_rhs_symbolic() == frame_rhs_symbolic().zeros(5, 1)


def test_xi_examples():
    s = canonical_initial_frame(0.2)
    w = xi_field(s, 1.0, 0.0)
    np.testing.assert_allclose(w, [np.sqrt(0.632), 0, 0.6, -0.2**1.5, 1.0], atol=1e-15)
    assert w[0] == pytest.approx(0.7949843, abs=1e-7)
    assert w[3] == pytest.approx(-0.0894427, abs=1e-7)
    assert abs(mk.norm_sq(w)) <= 1e-15
    assert mk.norm_sq(xi_field(canonical_initial_frame(0.16), 1.0, 1.0)) == pytest.approx(1.0, abs=1e-12)
    assert mk.norm_sq(xi_field(canonical_initial_frame(0.1), 1.0, -1.0)) == pytest.approx(-1.0, abs=1e-12)


@pytest.mark.parametrize("C, f0, b2_norm", [(0.0, 0.2, 0.0), (1.0, 0.16, 1.0), (-1.0, 0.1, -1.0)])
def test_extract_axes(C, f0, b2_norm):
    b1, b2 = extract_axes(canonical_initial_frame(f0), 1.0, C)
    assert mk.norm_sq(b1) == 1.0
    assert abs(mk.inner(b1, b2)) <= 1e-15
    assert mk.norm_sq(b2) == pytest.approx(b2_norm, abs=1e-12)


def test_parabolic_directrix_on_unit_span():
    # (1, 0, 0.2) on [0, 1]: integration stops where Q -> 0 near u = 0.80
    d = integrate_directrix(ModuliParams(1.0, 0.0, 0.2), (0.0, 1.0), tol=1e-10)
    assert d.truncation and "Q(f) < 1e-10" in d.truncation[0]
    assert b1_orthogonality(d) <= 1e-8
    assert hyperboloid_residual(d) <= 1e-8
    assert constraint_residual(d) <= 1e-7
    assert d.case is Case.PARABOLIC


def test_circular_xi_constant():
    d = integrate_directrix(ModuliParams(1.0, 1.0, 0.16), (0.0, 0.5))
    assert np.max(np.abs(d.xi - d.xi[0])) <= 1e-7
    assert constraint_residual(d) <= 1e-7


def test_gram_at_half():
    d = integrate_directrix(ModuliParams(1.0, 0.0, 0.1), (0.0, 0.5))
    assert d.u[-1] == 0.5
    assert mk.gram_drift(d.frames[-1]) <= 1e-8


@pytest.mark.parametrize("c, C, f0", SWEEP_SETS)
def test_directrix_invariants(c, C, f0):
    d = integrate_directrix(ModuliParams(c, C, f0), (-0.5, 0.5), tol=1e-10)
    assert gram_drift_max(d) <= 1e-6
    assert hyperboloid_residual(d) <= 1e-8
    assert constraint_residual(d) <= 1e-7
    assert e2_constancy(d) == 0.0
    assert xi_propagation_residual(d) <= 1e-6
    assert mk.norm_sq(d.b1) == 1.0
    assert abs(mk.inner(d.b1, d.b2)) <= 1e-14
    assert mk.norm_sq(d.b2) == pytest.approx(np.sign(C), abs=1e-12)


@pytest.mark.parametrize("c, C, f0", SWEEP_SETS)
def test_accel_norm_identity(c, C, f0):
    d = integrate_directrix(ModuliParams(c, C, f0), (-0.5, 0.5), tol=1e-10)
    assert accel_norm_residual(d) <= 1e-10


def test_f_matches_profile():
    p = ModuliParams(2.0, 1.0, 0.2)
    d = integrate_directrix(p, (-0.5, 0.5))
    prof = integrate_profile(p, (-0.5, 0.5))
    np.testing.assert_allclose(d.f, prof(d.u), atol=1e-9)
    np.testing.assert_allclose(d.f_at(d.u), d.f, atol=1e-15)


def test_sigma_interpolant_reproduces_nodes_and_derivatives():
    d = integrate_directrix(ModuliParams(1.0, -1.0, 0.1), (-0.5, 0.5))
    np.testing.assert_allclose(d.sigma(d.u), d.sigma_samples, atol=1e-15)
    np.testing.assert_allclose(d._sigma(d.u, 1), d.frames[:, 1], atol=1e-13)
    mid = 0.5 * (d.u[:-1] + d.u[1:])
    fine = integrate_directrix(ModuliParams(1.0, -1.0, 0.1), (-0.5, 0.5), tol=1e-13, nodes=mid)
    inside = (mid > fine.u[0]) & (mid < fine.u[-1])
    np.testing.assert_allclose(d.sigma(mid[inside]), fine.sigma(mid[inside]), atol=1e-10)
    with pytest.raises(OutOfSpan):
        d.sigma(0.6)


def test_corrupted_b2_detected():
    d = integrate_directrix(ModuliParams(1.0, 0.0, 0.2), (0.0, 0.5))
    bad = type(d)(d.u, d.f, d.frames, d.b1, 1.1 * d.b2, d.xi, d.case, d.params)
    assert constraint_residual(bad) >= 0.01
    np.testing.assert_allclose(axis_targets(d), -1 / (2 * d.f**0.75))


def test_nonplanar_directrix():
    for c, C, f0 in SWEEP_SETS:
        d = integrate_directrix(ModuliParams(c, C, f0), (-0.5, 0.5))
        assert d.f.max() / d.f.min() >= 1.1
        assert nonplanarity_report(d.sigma_samples).ratio >= 1e-4


def test_drift_limit_is_loud():
    with pytest.raises(DriftExceeded):
        integrate_directrix(ModuliParams(1.0, 0.0, 0.2), (-0.5, 0.5), tol=1e-2, max_step=np.inf, drift_limit=1e-9)


def test_inadmissible():
    with pytest.raises(Inadmissible):
        integrate_directrix(ModuliParams(1.0, 0.0, 0.5))


def test_deterministic():
    p = ModuliParams(2.0, -1.0, 0.07)
    a = integrate_directrix(p, (-0.5, 0.5))
    b = integrate_directrix(p, (-0.5, 0.5))
    assert a.frames.tobytes() == b.frames.tobytes()
