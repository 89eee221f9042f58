import numpy as np
import pytest
from mpmath import mp, mpf, sqrt as msqrt
from scipy.integrate import solve_ivp

from nls_stability.core import DomainError
from nls_stability.system import (
    SystemNLS, bound_state, check_instability_conditions, classify_La, coefficients,
    ground_state, mixing_matrices, operators_RI, semitrivial_degeneracy, shoot_central_value,
)
from nls_stability.spectral import check_A1


def _coefficients_mp(gamma):
    mp.dps = 40
    g = mpf(gamma)
    root = msqrt(1 + 2 * g * (g - 1))
    den = 2 + g ** 3
    return (2 - g - g * root) / den, (1 + g ** 2 + root) / den


@pytest.mark.parametrize("gamma", [0.1, 0.5, 0.9])
def test_coefficient_identities(gamma):
    c = coefficients(gamma)
    r1, r2 = c.identity_residuals()
    assert abs(r1) < 1e-12 and abs(r2) < 1e-12
    assert c.alpha > 0 and c.beta > 0
    a, b = _coefficients_mp(gamma)
    assert c.alpha == pytest.approx(float(a), rel=1e-14)
    assert c.beta == pytest.approx(float(b), rel=1e-14)


def test_coefficient_limit():
    c = coefficients(1.0)
    assert (c.alpha, c.beta) == (0.0, 1.0)
    near = coefficients(1 - 1e-9)
    assert near.alpha == pytest.approx(0.0, abs=1e-8)
    with pytest.raises(DomainError):
        coefficients(1.5)


@pytest.mark.parametrize("gamma", np.linspace(0.1, 0.9, 9))
def test_regime_bounds(gamma):
    c = coefficients(gamma)
    assert 1 < c.a_real < 2
    assert c.a_imag < 1


def test_mixing_matrices_orthogonal():
    A, B = mixing_matrices(coefficients(0.5))
    assert np.allclose(A @ A.T, np.eye(2), atol=1e-14)
    assert np.allclose(B @ B.T, np.eye(2), atol=1e-14)


def test_ground_state_one_dimension():
    g = ground_state(-1.0, 1, n_points=600)
    assert g.central_value == pytest.approx(1.5)
    assert g.residual < 1e-10
    with pytest.raises(DomainError):
        ground_state(1.0)


def test_three_dimensional_central_value():
    c = shoot_central_value(3)

    # independent shooting: count of sign changes decides the bracket side
    def blows_or_crosses(a):
        def rhs(r, y):
            return [y[1], -2 / r * y[1] + y[0] - y[0] ** 2]
        r0 = 1e-6
        sol = solve_ivp(rhs, (r0, 20), [a, 0.0], rtol=1e-11, atol=1e-13,
                        events=lambda r, y: y[0], dense_output=False)
        return sol.t_events[0].size > 0

    lo, hi = 1.0, 10.0
    for _ in range(50):
        mid = 0.5 * (lo + hi)
        lo, hi = (lo, mid) if blows_or_crosses(mid) else (mid, hi)
    assert c == pytest.approx(0.5 * (lo + hi), rel=1e-5)
    g = ground_state(-1.0, 3, n_points=800)
    assert g.residual < 1e-8


def test_bound_state_is_critical():
    g = ground_state(-1.0, 1, n_points=600)
    m = SystemNLS(0.5, g.grid)
    assert check_A1(m, -1.0, bound_state(0.5, g)).holds


def test_diagonalisation():
    r = operators_RI(0.5, -1.0, 1, n_points=600)
    assert max(r.residual_R, r.residual_I) < 1e-10


@pytest.mark.parametrize("a,case", [(2.0, "one-negative"), (1.0, "kernel"), (0.5, "positive-definite")])
def test_La_cases(a, case):
    r = classify_La(-1.0, 1, a, n_points=600)
    assert r.holds
    assert r.case == case


def test_instability_conditions_hold():
    reps = check_instability_conditions(0.5, -1.0, 1, n_points=600)
    assert all(r.holds for r in reps)


def test_semitrivial_kernel_two_dimensional():
    reps = semitrivial_degeneracy(-1.0, 1, n_points=600)
    assert reps[0].holds and reps[0].scalars["kernel_dim_est"] == 2


def test_A2a_value_approaches_zero_near_one():
    vals = []
    for g in (0.5, 0.7, 0.9, 0.99):
        reps = check_instability_conditions(g, -1.0, 1, n_points=400)
        vals.append(reps[1].scalars["form_value"])
    assert all(v < 0 for v in vals)
    assert np.all(np.diff(vals) > 0)
    assert abs(vals[-1]) < 0.05 * abs(vals[0])
