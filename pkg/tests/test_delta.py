import numpy as np
import pytest

from nls_stability.core import DomainError
from nls_stability.delta import (
    DeltaNLS, b_omega, closed_form, default_grid, free_soliton, odd_trial_form,
    odd_trial_form_derivative, operator_L, operator_M, profile, profile_domega,
)
from nls_stability.spectral import spectrum


def test_b_omega_values():
    assert b_omega(3.0, 1.0, -1.0) == pytest.approx(0.5493061443340549, rel=1e-14)
    assert b_omega(2.0, 0.0, -1.0) == 0.0
    with pytest.raises(DomainError):
        b_omega(2.0, 1.0, -0.2)


def test_free_soliton_amplitude():
    assert free_soliton(2.0, -1.0, 0.0) == pytest.approx(1.5, rel=1e-15)
    x = np.linspace(-5, 5, 11)
    ref = 1.5 / np.cosh(x / 2) ** 2
    assert np.allclose(free_soliton(2.0, -1.0, x), ref, rtol=1e-13)


def test_free_soliton_does_not_overflow():
    v = free_soliton(6.0, -4.0, np.array([0.0, 50.0, 1e3]))
    assert np.all(np.isfinite(v)) and v[-1] == 0.0


def test_profile_invariants(delta_p3):
    phi = delta_p3.field
    assert np.max(np.abs(phi - phi[::-1])) < 1e-12
    assert np.all(phi > 0)
    # refinement stays close to the sampled closed form
    ref = closed_form(3.0, 1.0, -1.0, delta_p3.grid.x)
    assert np.max(np.abs(phi - ref)) < 1e-3 * np.max(ref)


def test_profile_jump_condition(delta_p3):
    phi, g = delta_p3.field, delta_p3.grid
    i0, h = g.origin_index, g.h
    # slope jump phi'(0+) - phi'(0-) = gamma phi(0), up to O(h)
    jump = (phi[i0 + 1] - 2 * phi[i0] + phi[i0 - 1]) / h
    assert jump == pytest.approx(1.0 * phi[i0], rel=0.05)
    # discrete equation at the origin node
    lhs = -(phi[i0 + 1] - 2 * phi[i0] + phi[i0 - 1]) / h + 1.0 * phi[i0]
    rhs = h * (-1.0 * phi[i0] + phi[i0] ** 3)
    assert lhs == pytest.approx(rhs, abs=1e-10)


def test_profile_domega_solves_linearised_equation(delta_p3):
    m = delta_p3.model
    phi = delta_p3.field
    dphi = profile_domega(3.0, 1.0, -1.0, delta_p3.grid)
    assert np.max(np.abs(dphi - dphi[::-1])) < 1e-10
    L = operator_L(3.0, 1.0, -1.0, delta_p3.grid, phi)
    r = L @ dphi / m.mass - phi
    assert np.sqrt(np.sum(m.mass * r ** 2)) < 1e-5 * np.sqrt(np.sum(m.mass * phi ** 2))


def test_free_case_derivative_against_closed_form():
    grid = default_grid(-1.0, 4001)
    dphi = profile_domega(2.0, 0.0, -1.0, grid)
    i0 = grid.origin_index
    # d/domega of (-3 omega/2) sech^2(sqrt(-omega) x / 2) at x = 0 is -3/2
    assert dphi[i0] == pytest.approx(-1.5, rel=1e-5)


def test_M_kernel_is_phi(delta_p3):
    m, phi = delta_p3.model, delta_p3.field
    M = operator_M(3.0, 1.0, -1.0, delta_p3.grid, phi)
    rep = spectrum(M, m.mass, k=2)
    assert abs(rep.eigenvalues[0]) < 1e-8
    v = rep.eigenvectors[0]
    cos = abs(np.sum(m.mass * v * phi)) / np.sqrt(np.sum(m.mass * v * v) * np.sum(m.mass * phi * phi))
    assert cos > 1 - 1e-8


def test_L_has_two_negative_eigenvalues(delta_p3):
    m, phi = delta_p3.model, delta_p3.field
    L = operator_L(3.0, 1.0, -1.0, delta_p3.grid, phi)
    rep = spectrum(L, m.mass, k=4)
    assert rep.n_negative == 2


def test_odd_trial_form_signs():
    p, g, w = 3.0, 1.0, -1.0
    b = b_omega(p, g, w)
    assert abs(odd_trial_form(p, g, w, 0.0)) < 1e-10
    assert odd_trial_form_derivative(p, g, w, 0.0) > 0
    assert odd_trial_form(p, g, w, -b / 10) < 0


def test_dgrad_energy_identity(delta_p3, rng):
    m = delta_p3.model
    a = delta_p3.field + 0.3 * rng.standard_normal(m.shape)
    b = a + 0.2 * (rng.standard_normal(m.shape) + 1j * rng.standard_normal(m.shape))
    g = m.nonlinear_dgrad(a, b)
    lhs = m.nonlinear_energy(b) - m.nonlinear_energy(a)
    rhs = np.sum(m.mass * np.real(g * np.conj(b - a)))
    assert lhs == pytest.approx(rhs, rel=1e-10)


def test_dgrad_reduces_to_gradient(delta_p3):
    m = delta_p3.model
    u = delta_p3.field.astype(complex) * np.exp(0.3j)
    assert np.allclose(m.nonlinear_dgrad(u, u), m.nonlinear_grad(u), rtol=1e-12, atol=1e-14)


def test_dgrad_non_integer_power(rng):
    m = DeltaNLS(2.5, 1.0, default_grid(-1.0, 201))
    a = rng.standard_normal(m.shape) + 1j * rng.standard_normal(m.shape)
    b = a * (1 + 1e-9)
    b[::7] = a[::7] + 0.5
    g = m.nonlinear_dgrad(a, b)
    lhs = m.nonlinear_energy(b) - m.nonlinear_energy(a)
    rhs = np.sum(m.mass * np.real(g * np.conj(b - a)))
    assert lhs == pytest.approx(rhs, rel=1e-8)


def test_sector_profile_matches_full(delta_p3):
    even = delta_p3.sector("even")
    i0 = delta_p3.grid.origin_index
    assert np.allclose(even.field, delta_p3.field[i0:])
    assert even.model.charge(even.field) == pytest.approx(delta_p3.model.charge(delta_p3.field), rel=1e-12)
