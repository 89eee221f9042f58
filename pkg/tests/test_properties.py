import numpy as np
from hypothesis import given, settings, strategies as st

from nls_stability.delta import DeltaNLS, b_omega, default_grid
from nls_stability.linear import SineState, exact_evolve, sine_tube_distance
from nls_stability.system import coefficients

GRID = default_grid(-1.0, 101)

powers = st.one_of(st.integers(2, 7).map(float), st.floats(1.1, 7.0))
complex_arrays = st.lists(st.tuples(st.floats(-3, 3), st.floats(-3, 3)), min_size=101, max_size=101)


def _arr(pairs):
    return np.array([a + 1j * b for a, b in pairs])


@settings(max_examples=60, deadline=None)
@given(p=powers, a=complex_arrays, b=complex_arrays)
def test_discrete_gradient_identity(p, a, b):
    m = DeltaNLS(p, 1.0, GRID)
    ua, ub = _arr(a), _arr(b)
    g = m.nonlinear_dgrad(ua, ub)
    lhs = m.nonlinear_energy(ub) - m.nonlinear_energy(ua)
    rhs = float(np.sum(m.mass * np.real(g * np.conj(ub - ua))))
    scale = max(1.0, abs(m.nonlinear_energy(ub)), abs(m.nonlinear_energy(ua)))
    assert abs(lhs - rhs) <= 1e-9 * scale
    # symmetric in its arguments
    assert np.allclose(g, m.nonlinear_dgrad(ub, ua), rtol=1e-12, atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(p=powers, a=complex_arrays, s=st.floats(0, 2 * np.pi))
def test_gauge_invariance(p, a, s):
    m = DeltaNLS(p, 1.0, GRID)
    u = _arr(a)
    v = m.apply_T(s, u)
    assert np.isclose(m.energy(v), m.energy(u), rtol=1e-12, atol=1e-12)
    assert np.isclose(m.charge(v), m.charge(u), rtol=1e-12, atol=1e-12)


@settings(max_examples=100, deadline=None)
@given(gamma=st.floats(1e-3, 1.0 - 1e-6))
def test_coefficient_identities_hold(gamma):
    c = coefficients(gamma)
    r1, r2 = c.identity_residuals()
    assert abs(r1) < 1e-12 and abs(r2) < 1e-12
    assert 1 < c.a_real < 2 and c.a_imag < 1


@settings(max_examples=50, deadline=None)
@given(p=st.floats(1.1, 9.0), gamma=st.just(0.0) | st.floats(1e-3, 3.0), k=st.floats(1.01, 10.0))
def test_b_omega_nonnegative_and_vanishing_without_potential(p, gamma, k):
    omega = -(k * gamma / 2) ** 2 if gamma > 0 else -k
    b = b_omega(p, gamma, omega)
    assert b >= 0
    if gamma == 0:
        assert b == 0


@settings(max_examples=50, deadline=None)
@given(coef=st.lists(st.tuples(st.floats(-1, 1), st.floats(-1, 1)), min_size=8, max_size=8),
       t=st.floats(0, 100))
def test_linear_flow_preserves_tube_distance(coef, t):
    u = SineState(np.array([a + 1j * b for a, b in coef]))
    assert np.isclose(sine_tube_distance(exact_evolve(u, t)), sine_tube_distance(u), atol=1e-12)
