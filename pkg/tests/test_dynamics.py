import numpy as np
import pytest

from nls_stability.delta import DeltaNLS, default_grid
from nls_stability.dynamics import (
    BoundaryError, InsufficientDataError, IntegratorConfig, evolve, lyapunov_identity_residual,
)
from nls_stability.linear import LinearInterval, sine_mode
from nls_stability.lyapunov import tube_distance
from nls_stability.scenarios import instability_scenario, semitrivial_scenario


def test_config_validation():
    with pytest.raises(ValueError):
        IntegratorConfig(dt=0.0)
    with pytest.raises(ValueError):
        IntegratorConfig(fp_tol=1e-6)
    with pytest.raises(ValueError):
        IntegratorConfig(diag_stride=0)
    with pytest.raises(ValueError):
        IntegratorConfig(scheme="strang-splitting")


def test_zero_data_stays_zero():
    m = DeltaNLS(3.0, 1.0, default_grid(-1.0, 201))
    u, diag = evolve(m, m.zeros(), IntegratorConfig(dt=1e-2, t_end=1.0))
    assert np.all(u == 0)
    assert np.all(diag.E_series == 0)


def test_linear_bound_state_is_exact_phase():
    m = LinearInterval()
    phi = sine_mode(2, m.grid.x).astype(complex)
    cfg = IntegratorConfig(dt=1e-3, t_end=2.0, boundary_tol=None)
    u, diag = evolve(m, phi, cfg, 4.0, phi)
    assert np.max(diag.tube_dist_series) < 1e-8
    # Crank-Nicolson keeps the mode and only shifts its phase
    c = np.sum(m.mass * u * np.conj(phi)) / np.sum(m.mass * np.abs(phi) ** 2)
    assert abs(abs(c) - 1) < 1e-12


def test_stationary_orbit(delta_p6_even):
    from nls_stability.spectral import charge_orthogonal_minimizer

    m, phi = delta_p6_even.model, delta_p6_even.field.astype(complex)
    psi = charge_orthogonal_minimizer(m, -2.0, phi).psi
    _, diag = evolve(m, phi, IntegratorConfig(dt=1e-3, t_end=0.5, diag_stride=5), -2.0, phi, psi)
    assert np.max(diag.tube_dist_series) < 1e-10 * m.norm_x(phi) + 1e-10
    assert np.ptp(diag.A_series) < 1e-10
    assert np.max(np.abs(diag.P_series)) < 1e-8


def test_conservation_and_time_reversal(delta_p3):
    m = delta_p3.model
    u0 = delta_p3.field * (1 + 0.05 * np.exp(-m.grid.x ** 2)) + 0j
    cfg = IntegratorConfig(dt=2e-3, t_end=2.0, boundary_tol=None)
    u1, diag = evolve(m, u0, cfg)
    assert diag.valid and diag.energy_drift < 1e-6 and diag.charge_drift < 1e-6
    # conjugation reverses time for this gauge-invariant model
    u2, _ = evolve(m, np.conj(u1), cfg)
    assert np.max(np.abs(np.conj(u2) - u0)) < 1e-6


def test_negative_slope_instability_and_identity():
    sc = instability_scenario("negative-slope", n_points=1001)
    cfg = IntegratorConfig(dt=1e-3, t_end=3.0, diag_stride=10, tube_radius=0.05, post_exit=0.0)
    _, diag = evolve(sc.model, sc.u0, cfg, sc.omega, sc.phi, sc.psi)
    d0 = tube_distance(sc.model, sc.u0, sc.phi)
    assert diag.exit_time is not None
    assert np.max(diag.tube_dist_series) > 10 * d0
    # A grows monotonically while P < 0
    inside = np.isfinite(diag.A_series)
    a = diag.A_series[inside]
    assert np.all(diag.P_series[inside][1:] < 0)
    assert np.all(np.diff(a) > 0)
    assert lyapunov_identity_residual(diag) < 1e-2


def test_identity_needs_samples(delta_p3):
    m = delta_p3.model
    _, diag = evolve(m, delta_p3.field + 0j, IntegratorConfig(dt=1e-2, t_end=0.02))
    with pytest.raises(InsufficientDataError):
        lyapunov_identity_residual(diag)


def test_boundary_monitor():
    m = DeltaNLS(3.0, 1.0, default_grid(-1.0, 201))
    x = m.grid.x
    # a fast wave packet reaches the truncation boundary quickly
    u0 = np.exp(-(x - 5) ** 2) * np.exp(10j * x)
    with pytest.raises(BoundaryError):
        evolve(m, u0, IntegratorConfig(dt=1e-3, t_end=2.0, boundary_tol=1e-4))


def test_semitrivial_system_run_conserves():
    sc = semitrivial_scenario(0.5, n_points=400)
    cfg = IntegratorConfig(dt=4e-3, t_end=1.0, tube_radius=0.05)
    _, diag = evolve(sc.model, sc.u0, cfg, sc.omega, sc.phi)
    assert diag.valid
    assert diag.charge_drift < 1e-10
    assert diag.exit_time is None
