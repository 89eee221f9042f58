import numpy as np
import pytest
import scipy.sparse as sp

from nls_stability.delta import default_grid, profile, profile_domega
from nls_stability.linear import LinearInterval, sine_mode, check_counterexample
from nls_stability.spectral import (
    ConstraintError, charge_orthogonal_minimizer, check_A1, check_A2a, check_A3, check_B2,
    constrained_minimum, constrained_pencil_min, delta_sector_spectra, spectrum,
)


def test_identity_pencil():
    n = 50
    rep = spectrum(sp.identity(n, format="csr"), np.ones(n), k=5)
    assert np.allclose(rep.eigenvalues, 1.0)
    assert rep.n_negative == 0


def test_spectrum_matches_dense_eigensolve(rng):
    n = 60
    main = rng.uniform(-2, 2, n)
    off = rng.uniform(-1, 1, n - 1)
    A = sp.diags([off, main, off], [-1, 0, 1]).tocsr()
    w = rng.uniform(0.5, 2.0, n)
    rep = spectrum(A, w, k=6)
    d = 1 / np.sqrt(w)
    ref = np.linalg.eigvalsh(d[:, None] * A.toarray() * d[None, :])[:6]
    assert np.allclose(rep.eigenvalues, ref, atol=1e-12)
    assert np.all(np.diff(rep.eigenvalues) >= 0)


def test_asymmetric_operator_rejected():
    A = sp.csr_matrix(np.array([[1.0, 2.0], [0.0, 1.0]]))
    with pytest.raises(ValueError):
        spectrum(A, np.ones(2))


def test_constrained_min_relaxation(rng):
    n = 40
    A = np.diag(np.arange(n, dtype=float))
    B = np.ones(n)
    e0 = np.zeros(n)
    e0[0] = 1
    free, _ = constrained_pencil_min(A, B, [])
    con, vec = constrained_pencil_min(A, B, [e0])
    assert free[0] == pytest.approx(0.0)
    assert con[0] == pytest.approx(1.0)
    assert abs(vec[0] @ e0) < 1e-12


def test_sector_counts():
    out = delta_sector_spectra(3.0, 1.0, -1.0, n_points=1001)
    assert out["L_even"].n_negative == 1
    assert out["L_odd"].n_negative >= 1
    assert abs(out["M_even"].eigenvalues[0]) < 1e-8


def test_B2_variants(delta_p3, delta_p6_even):
    m, phi = delta_p3.model, delta_p3.field.astype(complex)
    assert check_B2(m, -1.0, phi, "b").holds
    me, pe = delta_p6_even.model, delta_p6_even.field.astype(complex)
    assert check_B2(me, -2.0, pe, "a").holds


def test_A1_on_profile(delta_p3):
    assert check_A1(delta_p3.model, -1.0, delta_p3.field.astype(complex)).holds


def test_charge_orthogonal_minimiser(delta_p6_even):
    m, phi = delta_p6_even.model, delta_p6_even.field.astype(complex)
    r = charge_orthogonal_minimizer(m, -2.0, phi)
    assert r.lam < 0
    assert r.multiplier_residual < 1e-8
    assert abs(r.jphi_psi_H) < 1e-10
    # dropping the constraint can only lower the minimum
    vals, _ = constrained_minimum(m, -2.0, phi, [], norm="H")
    assert vals[0] <= r.lam + 1e-12


def test_orthogonality_is_enforced(delta_p3):
    m, phi = delta_p3.model, delta_p3.field.astype(complex)
    with pytest.raises(ConstraintError):
        check_A2a(m, -1.0, phi, phi)


def test_linear_counterexample_numbers():
    by = {r.condition: r for r in check_counterexample()}
    assert by["A2a"].scalars["form_value"] == -3.0
    assert by["A3"].scalars["constrained_min"] == -3.0
    assert not by["A3"].holds
    assert by["A3+Jpsi"].scalars["constrained_min"] == 5.0
    assert by["A3+Jpsi"].holds


def test_linear_A3_fails_on_grid():
    m = LinearInterval()
    phi = sine_mode(2, m.grid.x).astype(complex)
    psi = sine_mode(1, m.grid.x).astype(complex)
    assert check_A2a(m, 4.0, phi, psi).scalars["form_value"] == pytest.approx(-3.0, abs=1e-9)
    assert not check_A3(m, 4.0, phi, psi).holds
