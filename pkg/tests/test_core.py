import numpy as np
import pytest

from nls_stability.core import DomainError, GridMismatchError, Grid, ModelSpec, fold, unfold
from nls_stability.delta import DeltaNLS, default_grid
from nls_stability.linear import LinearInterval, sine_mode
from nls_stability.system import SystemNLS

from conftest import random_field


def test_grid_spacing_and_symmetry():
    g = Grid.full_line(5.0, 101)
    assert g.h == pytest.approx(10.0 / 100, rel=0, abs=0)
    assert np.allclose(g.x, -g.x[::-1])
    assert g.x[g.origin_index] == 0.0


def test_grid_rejects_small_and_even_full_line():
    with pytest.raises((DomainError, ValueError)):
        Grid.full_line(5.0, 8)
    with pytest.raises((DomainError, ValueError)):
        Grid.full_line(5.0, 100)


def test_sector_fold_roundtrip(rng):
    g = Grid.full_line(4.0, 201)
    x = g.x
    even = np.cos(x) + 0j
    odd = np.sin(x) + 0j
    assert np.allclose(unfold(fold(even, "even"), "even"), even)
    assert np.allclose(unfold(fold(odd, "odd"), "odd"), odd)


def test_modelspec_validation():
    with pytest.raises(DomainError):
        ModelSpec("delta-nls", p=2.0, gamma=1.0, omega=-0.2)
    with pytest.raises(DomainError):
        ModelSpec("delta-nls", p=1.0, gamma=1.0, omega=-1.0)
    with pytest.raises(DomainError):
        ModelSpec("system-nls", gamma=0.5, omega=1.0)
    m = ModelSpec("delta-nls", p=3, gamma=1, omega=-1, grid=default_grid(-1.0, 101)).build()
    assert isinstance(m, DeltaNLS)


def test_shape_mismatch_raises():
    m = DeltaNLS(3.0, 1.0, default_grid(-1.0, 101))
    with pytest.raises(GridMismatchError):
        m.energy(np.zeros(100))


def test_zero_field_functionals():
    m = DeltaNLS(3.0, 1.0, default_grid(-1.0, 201))
    z = m.zeros()
    assert m.energy(z) == 0.0
    assert m.charge(z) == 0.0
    assert np.all(m.grad_S(-1.0, z) == 0)


def test_linear_mode_energy_and_charge():
    m = LinearInterval()
    phi2 = sine_mode(2, m.grid.x).astype(complex)
    assert m.energy(phi2) == pytest.approx(2.0, rel=1e-12)
    assert m.charge(phi2) == pytest.approx(0.5, rel=1e-12)


def test_free_soliton_charge_is_three(free_model):
    # (1/2) int (3/2)^2 sech^4(x/2) dx = 3
    from nls_stability.delta import profile

    prof = profile(2.0, 0.0, -1.0, free_model.grid)
    assert free_model.charge(prof.field) == pytest.approx(3.0, rel=1e-5)


def test_apply_J():
    m = DeltaNLS(3.0, 1.0, default_grid(-1.0, 101))
    u = np.exp(-m.grid.x ** 2) + 0j
    assert np.allclose(m.apply_J(u), 1j * u)
    assert np.allclose(m.apply_J(m.apply_J(u)), -u)
    s = SystemNLS(0.5, Grid.radial(10.0, 100))
    v = np.exp(-s.grid.x ** 2)
    w = s.apply_J(np.array([v, 0 * v], dtype=complex))
    assert np.allclose(w, [1j * v, 0 * v])
    w = s.apply_J(np.array([0 * v, v], dtype=complex))
    assert np.allclose(w, [0 * v, 2j * v])


def test_apply_T_periodic_and_generated_by_J(rng):
    s = SystemNLS(0.5, Grid.radial(10.0, 100))
    u = random_field(s, rng)
    assert np.allclose(s.apply_T(0.0, u), u)
    assert np.allclose(s.apply_T(2 * np.pi, u), u, atol=1e-12)
    eps = 1e-6
    fd = (s.apply_T(eps, u) - s.apply_T(-eps, u)) / (2 * eps)
    assert np.allclose(fd, s.apply_J(u), atol=1e-8)


def test_grad_S_matches_finite_difference(delta_p3, rng):
    m = delta_p3.model
    u = delta_p3.field + 0.1 * random_field(m, rng)
    v = random_field(m, rng)
    eps = 1e-5
    fd = (m.action(-1.0, u + eps * v) - m.action(-1.0, u - eps * v)) / (2 * eps)
    assert m.inner_h(m.grad_S(-1.0, u), v) == pytest.approx(fd, rel=1e-7)


def test_profile_is_critical_point(delta_p3):
    from nls_stability.core import dual_norm

    m, phi = delta_p3.model, delta_p3.field
    assert dual_norm(m, m.grad_S(-1.0, phi)) < 1e-8 * m.norm_x(phi)


def test_riesz_maps_on_linear_modes():
    m = LinearInterval()
    for n in (1, 2, 5):
        phi = sine_mode(n, m.grid.x).astype(complex)
        assert np.allclose(m.riesz_X(phi), n ** 2 * phi, atol=1e-9)
        assert np.allclose(m.riesz_H(phi), phi)
