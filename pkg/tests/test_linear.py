import numpy as np
import pytest

from nls_stability.linear import (
    BOUND_MODE, SineState, exact_evolve, perturbation_study, sine_tube_distance,
)


def test_exact_evolution_identity_and_period():
    u = SineState.mode(BOUND_MODE, 16)
    assert np.allclose(exact_evolve(u, 0.0).coefficients, u.coefficients)
    assert np.allclose(exact_evolve(u, np.pi / 2).coefficients, u.coefficients, atol=1e-15)


def test_invariants_exact(rng):
    a = rng.standard_normal(32) + 1j * rng.standard_normal(32)
    u = SineState(a)
    for t in (0.3, 7.0, 100.0):
        v = exact_evolve(u, t)
        assert v.charge() == pytest.approx(u.charge(), rel=1e-14)
        assert v.energy() == pytest.approx(u.energy(), rel=1e-14)


def test_sine_tube_distance_zero_on_orbit():
    u = SineState.mode(BOUND_MODE, 16, amplitude=np.exp(0.7j))
    assert sine_tube_distance(u) < 1e-15


def test_perturbations_stay_close():
    out = perturbation_study(n_trials=10, size=1e-2, t_end=50.0)
    assert out["max_tube_distance"] <= 2e-2
    assert out["max_modulus_change"] < 1e-14
