import numpy as np
import pytest

from nls_stability.core import DomainError
from nls_stability.lyapunov import (
    Lyapunov, TubeExitError, align, charge_normalise, energy_gap, phase, test_curve as curve,
    tube_distance,
)
from nls_stability.spectral import charge_orthogonal_minimizer

from conftest import random_field


@pytest.fixture(scope="module")
def setup(delta_p6_even):
    m, phi = delta_p6_even.model, delta_p6_even.field.astype(complex)
    psi = charge_orthogonal_minimizer(m, -2.0, phi).psi
    return m, phi, psi


def test_distance_to_orbit_point(delta_p3):
    m, phi = delta_p3.model, delta_p3.field.astype(complex)
    assert tube_distance(m, m.apply_T(1.3, phi), phi) < 1e-10


def test_amplitude_cannot_be_absorbed(delta_p3):
    m, phi = delta_p3.model, delta_p3.field.astype(complex)
    assert tube_distance(m, 2 * phi, phi) == pytest.approx(m.norm_x(phi), rel=1e-12)


def test_small_perturbation_distance(setup):
    m, phi, psi = setup
    d = 1e-4
    dist = tube_distance(m, phi + d * psi, phi)
    assert dist == pytest.approx(d * m.norm_x(psi), rel=1e-3)


def test_phase_recovers_shift(setup):
    m, phi, _ = setup
    for s0 in (0.0, 0.7, 3.0, 5.9):
        th = phase(m, m.apply_T(s0, phi), phi)
        assert np.angle(np.exp(1j * (th + s0))) == pytest.approx(0.0, abs=1e-9)


def test_functionals_at_bound_state(setup):
    m, phi, psi = setup
    st = align(m, -2.0, phi, psi, phi)
    assert st.distance < 1e-12
    assert abs(st.lambda_value) < 1e-10
    assert abs(st.p_value) < 1e-8


def test_A_is_phase_invariant(setup, rng):
    m, phi, psi = setup
    lyap = Lyapunov(m, -2.0, phi, psi)
    u = phi + 0.01 * random_field(m, rng) / m.norm_x(random_field(m, rng))
    a0 = lyap.align(u).a_value
    for s in (0.4, 2.2):
        assert lyap.align(m.apply_T(s, u)).a_value == pytest.approx(a0, rel=1e-8, abs=1e-12)


def test_alignment_is_optimal(setup, rng):
    m, phi, psi = setup
    u = phi + 0.02 * random_field(m, rng)
    st = align(m, -2.0, phi, psi, u, tube_radius=np.inf)
    for s in np.linspace(0, 2 * np.pi, 64, endpoint=False):
        assert st.distance <= m.norm_x(m.apply_T(s, u) - phi) + 1e-12
    assert abs(m.inner_x(st.m_field, m.apply_J(phi))) < 1e-8 * m.norm_x(phi) ** 2


def test_tube_exit_raises(setup):
    m, phi, psi = setup
    with pytest.raises(TubeExitError):
        align(m, -2.0, phi, psi, 2 * phi)


def test_test_curve_keeps_charge(setup):
    m, phi, psi = setup
    assert np.allclose(curve(m, -2.0, phi, psi, 0.0), phi)
    u = curve(m, -2.0, phi, psi, 0.05)
    assert m.charge(u) == pytest.approx(m.charge(phi), rel=1e-12)
    with pytest.raises(DomainError):
        curve(m, -2.0, phi, psi, 1e6)


def test_negative_direction_lowers_action(setup):
    m, phi, psi = setup
    s0 = m.action(-2.0, phi)
    for lam in (0.01, -0.01):
        u = curve(m, -2.0, phi, psi, lam)
        assert m.action(-2.0, u) < s0
        assert lam * align(m, -2.0, phi, psi, u).p_value < 0


def test_energy_gap_zero_at_bound_state_and_nonnegative(setup, rng):
    m, phi, psi = setup
    assert abs(energy_gap(m, -2.0, phi, psi, phi)) < 1e-12
    for _ in range(10):
        w = random_field(m, rng)
        u = charge_normalise(m, phi + 0.02 * w / m.norm_x(w), phi)
        assert energy_gap(m, -2.0, phi, psi, u) >= -1e-10


def test_energy_gap_needs_matching_charge(setup):
    m, phi, psi = setup
    with pytest.raises(DomainError):
        energy_gap(m, -2.0, phi, psi, 1.01 * phi)
