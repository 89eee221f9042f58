"""
The free Schrodinger flow on ``(0, pi)`` with Dirichlet ends.

Every eigenfunction ``phi_n = sqrt(2/pi) sin(n x)`` is a stable bound state,
yet for ``omega = 4``, ``phi = phi_2`` and ``psi = phi_1`` the coercivity
condition on the three-constraint set fails.  This is the example showing
that the spectral hypotheses of the instability theorem cannot be weakened.

Two representations are provided: exact sine coefficients (``SineState``)
and grid fields on a segment grid whose stiffness is assembled spectrally,
so that sampled sines are exact eigenvectors with eigenvalues ``n^2``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp

from .core import DomainError, Grid, Model
from .spectral import ConditionReport

OMEGA = 4.0
BOUND_MODE = 2
PSI_MODE = 1


def sine_mode(n: int, x) -> np.ndarray:
    return np.sqrt(2.0 / np.pi) * np.sin(n * np.asarray(x, dtype=float))


def default_grid(n_points: int = 127) -> Grid:
    return Grid.segment(0.0, np.pi, n_points)


class LinearInterval(Model):
    """``E(u) = ||u'||^2 / 2``, ``(u, v)_X = (u', v')_H``, ``J = i``."""

    j_weights = (1.0,)
    x_mass = False

    def __init__(self, grid: Grid | None = None):
        grid = default_grid() if grid is None else grid
        if grid.kind != "segment":
            raise DomainError("linear-interval lives on a segment grid")
        if abs(grid.left - grid.h) > 1e-12 or abs(grid.right + grid.h - np.pi) > 1e-9:
            raise DomainError("linear-interval grid must be the interior of (0, pi)")
        self.grid = grid

    @cached_property
    def basis(self) -> np.ndarray:
        """Columns ``phi_n`` sampled on the grid, ``n = 1..n_points``.

        They are orthonormal for the node weights ``h``.
        """
        n = np.arange(1, self.grid.n_points + 1)
        return np.sqrt(2.0 / np.pi) * np.sin(np.outer(self.grid.x, n))

    @cached_property
    def kinetic_form(self) -> sp.csr_matrix:
        Phi = self.basis
        n2 = np.arange(1, self.grid.n_points + 1) ** 2
        Wphi = self.mass[:, None] * Phi
        K = (Wphi * n2) @ Wphi.T
        return sp.csr_matrix(0.5 * (K + K.T))

    @cached_property
    def _x_chol(self):
        return la.cho_factor(self.x_form.toarray())

    def solve_x_form(self, rhs) -> np.ndarray:
        return la.cho_solve(self._x_chol, rhs)

    def hessian_forms(self, omega: float, phi=None) -> tuple:
        L = (self.kinetic_form - omega * sp.diags(self.mass)).tocsr()
        return L, L

    def to_coefficients(self, u) -> np.ndarray:
        u = self.check(u)
        return self.basis.T @ (self.mass * u)

    def from_coefficients(self, a) -> np.ndarray:
        a = np.asarray(a, dtype=complex)
        out = np.zeros(self.grid.n_points, dtype=complex)
        out += self.basis[:, : a.size] @ a
        return out


@dataclass(frozen=True)
class SineState:
    """Coefficients ``a_n`` of ``u = sum a_n phi_n``, ``n = 1..len(a)``."""

    coefficients: np.ndarray

    @property
    def modes(self) -> np.ndarray:
        return np.arange(1, len(self.coefficients) + 1)

    @classmethod
    def mode(cls, n: int, n_max: int = 64, amplitude: complex = 1.0) -> "SineState":
        a = np.zeros(n_max, dtype=complex)
        a[n - 1] = amplitude
        return cls(a)

    def charge(self) -> float:
        return 0.5 * float(np.sum(np.abs(self.coefficients) ** 2))

    def energy(self) -> float:
        return 0.5 * float(np.sum(self.modes ** 2 * np.abs(self.coefficients) ** 2))

    def norm_x(self) -> float:
        return float(np.sqrt(np.sum(self.modes ** 2 * np.abs(self.coefficients) ** 2)))

    def evaluate(self, x) -> np.ndarray:
        return np.sqrt(2.0 / np.pi) * np.sin(np.outer(np.asarray(x), self.modes)) @ self.coefficients


def exact_evolve(state: SineState, t: float) -> SineState:
    """``a_n -> exp(i n^2 t) a_n``."""
    n = state.modes
    return SineState(np.exp(1j * n ** 2 * t) * state.coefficients)


def sine_tube_distance(state: SineState, n: int = BOUND_MODE) -> float:
    """``inf_s ||u - exp(i s) phi_n||_X`` in closed form.

    The phase only acts on the ``n``-th coefficient, so the best ``s`` aligns
    it with the positive axis.
    """
    a = state.coefficients
    w = state.modes ** 2
    rest = np.sum(w * np.abs(a) ** 2) - w[n - 1] * abs(a[n - 1]) ** 2
    return float(np.sqrt(max(rest + w[n - 1] * (abs(a[n - 1]) - 1.0) ** 2, 0.0)))


def _sine_form(n_max: int, omega: float) -> np.ndarray:
    return np.arange(1, n_max + 1) ** 2 - omega


def _constrained_sine_min(n_max: int, omega: float, excluded_real, excluded_imag):
    """Minimum of the diagonal form over unit-H vectors avoiding the listed
    real and imaginary mode components; returns ``(value, mode, part)``."""
    diag = _sine_form(n_max, omega)
    best = (np.inf, 0, "")
    for part, excl in (("real", excluded_real), ("imag", excluded_imag)):
        for n in range(1, n_max + 1):
            if n in excl:
                continue
            if diag[n - 1] < best[0]:
                best = (float(diag[n - 1]), n, part)
    return best


def check_counterexample(n_max: int = 64, grid_points: int = 127) -> list:
    """A1 and A2a hold at ``(omega, phi, psi) = (4, phi_2, phi_1)`` while the
    three-constraint minimum is negative; a fourth constraint restores it.

    Minima are H-normalised Rayleigh quotients in the exact sine basis; the
    X-normalised value of the three-constraint problem is also reported, as
    is the grid-assembly cross-check of the diagonal form.
    """
    if n_max < 8:
        raise DomainError("n_max must be at least 8")
    omega = OMEGA
    diag = _sine_form(n_max, omega)
    # A1: grad S(phi_2) has coefficients (n^2 - omega) delta_{n2} = 0
    a1_res = float(abs(diag[BOUND_MODE - 1]))
    a2a = float(diag[PSI_MODE - 1])
    # W: (phi_2, w) = 0 kills Re a_2; (J phi_2, w) = 0 kills Im a_2; (psi, w) = 0 kills Re a_1
    min3, mode3, part3 = _constrained_sine_min(n_max, omega, {1, 2}, {2})
    min3_x = min(
        (diag[n - 1] / n ** 2 for n in range(1, n_max + 1) if n != 2), default=np.inf
    )
    min4, mode4, part4 = _constrained_sine_min(n_max, omega, {1, 2}, {1, 2})
    witness = np.zeros(n_max, dtype=complex)
    witness[mode3 - 1] = 1j if part3 == "imag" else 1.0

    model = LinearInterval(default_grid(grid_points))
    L, _ = model.hessian_forms(omega)
    Phi = model.basis[:, :n_max]
    grid_diag = Phi.T @ (L @ Phi)
    cross = float(np.max(np.abs(grid_diag - np.diag(diag))))

    return [
        ConditionReport("A1", bool(a1_res == 0.0), None, {"residual": a1_res}),
        ConditionReport("A2a", bool(a2a < 0), None, {"form_value": a2a}),
        ConditionReport(
            "A3", bool(min3 > 0), witness,
            {"constrained_min": min3, "constrained_min_X": float(min3_x), "mode": mode3},
            note=f"minimiser is the {part3} part of mode {mode3}",
        ),
        ConditionReport(
            "A3+Jpsi", bool(min4 > 0), None,
            {"constrained_min": min4, "mode": mode4},
            note="adding (J psi, w)_H = 0 restores positivity",
        ),
        ConditionReport("grid_consistency", bool(cross < 1e-8), None,
                        {"max_abs_difference": cross}),
    ]


def perturbation_study(n_trials: int = 50, size: float = 1e-2, t_end: float = 100.0,
                       n_times: int = 201, n_max: int = 64, seed: int = 0) -> dict:
    """Random X-size ``size`` perturbations of ``phi_2`` under exact evolution."""
    rng = np.random.default_rng(seed)
    times = np.linspace(0.0, t_end, n_times)
    worst = 0.0
    max_modulus_change = 0.0
    for _ in range(n_trials):
        pert = rng.standard_normal(n_max) + 1j * rng.standard_normal(n_max)
        pert /= np.arange(1, n_max + 1) ** 2  # keep the tail small
        base = SineState.mode(BOUND_MODE, n_max)
        scale = size / SineState(pert).norm_x()
        u0 = SineState(base.coefficients + scale * pert)
        for t in times:
            ut = exact_evolve(u0, t)
            worst = max(worst, sine_tube_distance(ut))
            max_modulus_change = max(
                max_modulus_change,
                float(np.max(np.abs(np.abs(ut.coefficients) - np.abs(u0.coefficients)))),
            )
    return {"max_tube_distance": worst, "max_modulus_change": max_modulus_change,
            "n_trials": n_trials, "size": size, "t_end": t_end}
