import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from qudit_sim import (
    ApertureSpec,
    BiphotonAmplitude,
    ChannelGeometry,
    GridTooNarrow,
    PumpProfile,
    QuditState,
    SamplingError,
    ValidationError,
    analytic_biphoton,
    analytic_multislit_F,
    classical_correlated_state,
    fidelity,
    ideal_qudit_state,
    mirror_state,
    numeric_biphoton_F,
    project_to_slit_basis,
)
from qudit_sim.optics import sinc
from qudit_sim.source import MixedSlitState, default_q_axes

MM, UM = 1e-3, 1e-6
A = 0.045 * MM
D_SP = 0.17 * MM


def axes(n, qmax):
    step = 2 * qmax / n
    return ((-(n // 2) * step, step, n),) * 2


WIDE_AXES = axes(256, 12 * np.pi / A)


# -- closed-form amplitude ---------------------------------------------------


def test_analytic_zero_at_first_sinc_node(geom, slits4):
    q2 = np.linspace(-1e5, 1e5, 7)
    assert np.abs(analytic_multislit_F(geom, slits4, np.pi / A, q2)).max() < 1e-12


def test_analytic_value_at_origin(geom, slits4):
    phase = geom.k * D_SP ** 2 / geom.z_A
    assert phase == pytest.approx(1.0992, abs=1e-4)
    expected = 2 * (cmath.exp(1j * phase / 8) + cmath.exp(1j * 9 * phase / 8))
    assert abs(cmath.phase(cmath.exp(1j * phase / 8)) - 0.1374) < 1e-4
    assert abs(cmath.phase(cmath.exp(1j * 9 * phase / 8)) - 1.2365) < 1e-4
    assert analytic_multislit_F(geom, slits4, 0.0, 0.0) == pytest.approx(expected, rel=1e-14)


def test_analytic_matches_term_by_term_oracle(geom, slits4, rng):
    for q1, q2 in rng.uniform(-3e5, 3e5, size=(50, 2)):
        assert analytic_multislit_F(geom, slits4, q1, q2) == pytest.approx(oracles.multislit_F(q1, q2), rel=1e-12, abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(q1=st.floats(-1e6, 1e6), q2=st.floats(-1e6, 1e6), D=st.integers(1, 6))
def test_analytic_parity(q1, q2, D):
    geom = ChannelGeometry.two_f(826e-9, 0.2, 0.15)
    s = ApertureSpec.multi_slit(D, D_SP, A)
    assert analytic_multislit_F(geom, s, -q1, -q2) == pytest.approx(analytic_multislit_F(geom, s, q1, q2), rel=1e-9, abs=1e-12)


def test_biphoton_normalize_and_validation():
    g = BiphotonAmplitude(np.ones((4, 4)), (0, 0), (0.5, 2.0))
    n = g.normalize()
    assert n.norm2() == pytest.approx(1.0)
    assert n.normalization == pytest.approx(0.25)
    with pytest.raises(ValidationError):
        BiphotonAmplitude(np.ones((1, 4)), (0, 0), (1, 1))
    z = BiphotonAmplitude(np.zeros((3, 3)), (0, 0), (1, 1)).normalize()
    assert z.normalization == 0 and not z.grid.any()


# -- numeric aperture integral ------------------------------------------------


def test_numeric_opaque_arm_gives_zero(geom, slits4):
    opaque = ApertureSpec.tabulated([-1e-4, 1e-4], [0, 0])
    F = numeric_biphoton_F(slits4, opaque, PumpProfile.gaussian(50 * UM), geom, axes(16, 1e5))
    assert not np.any(F.grid)


def test_single_slit_wide_pump_is_product_of_slit_transforms(geom):
    """A pump much wider than the slit leaves each photon with its own slit transform."""
    slit = ApertureSpec.multi_slit(1, 0.0, A)
    ax = axes(64, 3 * np.pi / A)
    F = numeric_biphoton_F(slit, slit, PumpProfile.gaussian(1 * MM), geom, ax, rtol=2e-4)
    q = F.axis(0)
    ref = np.outer(sinc(q * A), sinc(q * A))
    mag = np.abs(F.grid) / np.abs(F.grid).max()
    idx = np.argwhere(np.abs(ref) > 0.1)
    pick = idx[np.linspace(0, len(idx) - 1, 20).astype(int)]
    for i, j in pick:
        assert mag[i, j] == pytest.approx(abs(ref[i, j]), rel=0.01)


def test_single_slit_point_pump_depends_on_wavevector_difference(geom):
    """A point pump pins x2 = -x1, so F is a function of q1 - q2 only."""
    slit = ApertureSpec.multi_slit(1, 0.0, A)
    ax = axes(64, 3 * np.pi / A)
    F = numeric_biphoton_F(slit, slit, PumpProfile.point_like(), geom, ax)
    mag = np.abs(F.grid) / np.abs(F.grid).max()
    shifted = np.abs(mag[1:, 1:] - mag[:-1, :-1]).max()  # move along q1 = q2 + const
    assert shifted < 0.01
    q = F.axis(0)
    product = np.abs(np.outer(sinc(q * A), sinc(q * A)))
    assert np.abs(mag - product).max() > 0.5


def test_numeric_rejects_coarse_user_step(geom, slits4):
    with pytest.raises(SamplingError):
        numeric_biphoton_F(slits4, slits4, PumpProfile.gaussian(D_SP), geom, axes(8, 1e5), x_step=5 * MM)


def test_numeric_convergence_failure_is_reported(geom, slits4):
    with pytest.raises(SamplingError):
        numeric_biphoton_F(slits4, slits4, PumpProfile.gaussian(D_SP), geom, WIDE_AXES, rtol=1e-14, max_refinements=1)


# -- qudit states ------------------------------------------------------------


def test_ideal_state_laboratory_geometry(geom, slits4):
    s = ideal_qudit_state(geom, slits4)
    c = s.amplitudes
    anti = np.fliplr(c).diagonal()
    np.testing.assert_allclose(np.abs(anti), 0.5, rtol=1e-15)
    assert np.count_nonzero(np.abs(c) > 0) == 4
    np.testing.assert_allclose(c, oracles.ideal_coefficients(), atol=1e-15)
    rel = cmath.phase(s.amplitude(1.5, -1.5) / s.amplitude(0.5, -0.5))
    assert rel == pytest.approx(geom.k * D_SP ** 2 / geom.z_A, abs=1e-12)
    assert rel == pytest.approx(1.0992, abs=1e-4)


def test_ideal_state_single_slit(geom):
    s = ideal_qudit_state(geom, ApertureSpec.multi_slit(1, 0.0, A))
    np.testing.assert_array_equal(s.amplitudes, [[1]])


@pytest.mark.parametrize("D", [2, 3, 4, 8])
def test_ideal_state_normalized_and_maximally_entangled(geom, D):
    s = ideal_qudit_state(geom, ApertureSpec.multi_slit(D, D_SP, A))
    assert s.norm() == pytest.approx(1.0, abs=1e-12)
    sv = np.linalg.svd(s.amplitudes, compute_uv=False)
    np.testing.assert_allclose(sv, 1 / math.sqrt(D), atol=1e-9)


def test_classical_state():
    r = classical_correlated_state(4)
    np.testing.assert_array_equal(np.fliplr(r.weights).diagonal(), [0.25] * 4)
    assert r.weights.sum() == 1
    np.testing.assert_array_equal(r.weights.sum(axis=1), [0.25] * 4)
    np.testing.assert_array_equal(classical_correlated_state(1).weights, [[1.0]])
    with pytest.raises(ValidationError):
        MixedSlitState(np.array([[0.5, -0.1], [0.3, 0.3]]))


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 9))
def test_classical_marginals_uniform(D):
    w = classical_correlated_state(D).weights
    np.testing.assert_allclose(w.sum(axis=0), 1 / D)
    np.testing.assert_allclose(w.sum(axis=1), 1 / D)


# -- projection --------------------------------------------------------------


def test_projection_recovers_ideal_state(geom, slits4):
    # sinc tails beyond the q window count as leakage (~1/(pi a q_max) per arm),
    # so the window must reach +-40 pi / a for leakage below 1 %
    F = analytic_biphoton(geom, slits4, axes(2048, 40 * np.pi / A))
    st_ = project_to_slit_basis(F, slits4)
    assert fidelity(st_, ideal_qudit_state(geom, slits4)) >= 0.999
    assert st_.leakage < 0.01
    coarse = project_to_slit_basis(analytic_biphoton(geom, slits4), slits4)
    assert fidelity(coarse, ideal_qudit_state(geom, slits4)) >= 0.999
    assert coarse.leakage < 0.02


def test_projection_single_slit_embedding(geom):
    one = ApertureSpec.multi_slit(1, 0.0, A)
    s = project_to_slit_basis(analytic_biphoton(geom, one, (default_q_axes(ApertureSpec.multi_slit(4, D_SP, A)),) * 2), one)
    assert s.dim == 1 and abs(s.amplitudes[0, 0]) == pytest.approx(1.0)


def test_projection_requires_wide_q_range(geom, slits4):
    F = analytic_biphoton(geom, slits4, axes(256, 5 * np.pi / A))
    with pytest.raises(GridTooNarrow):
        project_to_slit_basis(F, slits4)


def test_projection_rejects_excess_leakage(geom, slits4):
    F = numeric_biphoton_F(slits4, slits4, PumpProfile.point_like(), geom, WIDE_AXES)
    with pytest.raises(GridTooNarrow) as exc:
        project_to_slit_basis(F, slits4)
    assert exc.value.leakage > 0.05


def test_mirror_is_an_involution(geom, slits4):
    s = ideal_qudit_state(geom, slits4)
    for m in ("none", "arm1", "arm2", "both"):
        np.testing.assert_array_equal(mirror_state(mirror_state(s, m), m).amplitudes, s.amplitudes)
    F = analytic_biphoton(geom, slits4)
    twice = mirror_state(project_to_slit_basis(F, slits4, "both"), "both")
    np.testing.assert_allclose(twice.amplitudes, project_to_slit_basis(F, slits4).amplitudes, atol=1e-15)


@settings(max_examples=15, deadline=None)
@given(theta=st.floats(0, 2 * np.pi))
def test_projection_global_phase(theta):
    geom = ChannelGeometry.two_f(826e-9, 0.2, 0.15)
    s4 = ApertureSpec.multi_slit(4, D_SP, A)
    F = analytic_biphoton(geom, s4, axes(256, 12 * np.pi / A))
    G = BiphotonAmplitude(F.grid * np.exp(1j * theta), F.q_start, F.q_step)
    a, b = project_to_slit_basis(F, s4), project_to_slit_basis(G, s4)
    np.testing.assert_allclose(np.abs(b.amplitudes), np.abs(a.amplitudes), atol=1e-12)
    np.testing.assert_allclose(b.amplitudes, a.amplitudes * np.exp(1j * theta), atol=1e-12)


def test_exchange_symmetry_of_correlations(geom, slits4):
    F = numeric_biphoton_F(slits4, slits4, PumpProfile.gaussian(D_SP / 5), geom, WIDE_AXES)
    c = project_to_slit_basis(F, slits4, max_leakage=1.0).amplitudes
    for i in range(4):
        assert abs(c[i, 3 - i]) == pytest.approx(abs(c[3 - i, i]), abs=1e-6)


def test_point_pump_numeric_state_is_the_ideal_state(geom, slits4):
    """Inside the slit subspace the narrow-pump amplitude is the ideal state,
    although most of its weight lies outside that subspace."""
    F = numeric_biphoton_F(slits4, slits4, PumpProfile.point_like(), geom, WIDE_AXES)
    s = project_to_slit_basis(F, slits4, max_leakage=1.0)
    assert fidelity(s, ideal_qudit_state(geom, slits4)) > 0.9999
    assert s.leakage > 0.5


def test_fidelity_decreases_with_pump_waist(geom, slits4):
    waists = np.linspace(D_SP / 50, 2 * D_SP, 5)
    ideal = ideal_qudit_state(geom, slits4)
    fids = []
    for w in waists:
        F = numeric_biphoton_F(slits4, slits4, PumpProfile.gaussian(w), geom, WIDE_AXES)
        fids.append(fidelity(project_to_slit_basis(F, slits4, max_leakage=1.0), ideal))
    assert all(b <= a for a, b in zip(fids, fids[1:])), fids
    assert fids[0] > 0.999 and fids[-1] < 0.7


def test_qudit_state_accessors():
    s = QuditState(np.diag([1, 1j]) / math.sqrt(2))
    np.testing.assert_array_equal(s.labels, [-0.5, 0.5])
    assert s.amplitude(0.5, 0.5) == pytest.approx(1j / math.sqrt(2))
    with pytest.raises(ValidationError):
        QuditState(np.ones((2, 3)))
