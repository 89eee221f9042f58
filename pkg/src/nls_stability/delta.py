"""
NLS with a repulsive delta potential on the line,

    i u_t - u_xx + gamma delta(x) u = |u|^{p-1} u,

its explicit two-hump bound states and their linearisation.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy import integrate

from .core import DomainError, Grid, Model, dual_norm, fold, tridiag_solve


def check_omega(p: float, gamma: float, omega: float) -> None:
    if not p > 1:
        raise DomainError(f"need p > 1, got {p}")
    if gamma < 0:
        raise DomainError("attractive potential (gamma < 0) is not supported")
    if not omega < -gamma ** 2 / 4:
        raise DomainError(f"omega={omega} outside Omega = (-inf, {-gamma ** 2 / 4:g})")


def atanh(z: float) -> float:
    return 0.5 * np.log((1.0 + z) / (1.0 - z))


def b_omega(p: float, gamma: float, omega: float) -> float:
    """Shift of the two humps away from the origin."""
    check_omega(p, gamma, omega)
    k = np.sqrt(-omega)
    return 2.0 * atanh(gamma / (2.0 * k)) / ((p - 1.0) * k)


def free_soliton(p: float, omega: float, x) -> np.ndarray:
    """Positive even solution of ``-v'' - omega v - v^p = 0`` (overflow-safe)."""
    x = np.abs(np.asarray(x, dtype=float))
    kappa = 0.5 * (p - 1.0) * np.sqrt(-omega)
    amp = (0.5 * (p + 1.0) * (-omega)) ** (1.0 / (p - 1.0))
    # log cosh(kx) = kx + log1p(exp(-2kx)) - log 2
    logcosh = kappa * x + np.log1p(np.exp(-2.0 * kappa * x)) - np.log(2.0)
    return amp * np.exp(-2.0 / (p - 1.0) * logcosh)


def free_soliton_dx(p: float, omega: float, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    kappa = 0.5 * (p - 1.0) * np.sqrt(-omega)
    return -np.sqrt(-omega) * np.tanh(kappa * x) * free_soliton(p, omega, x)


def free_soliton_dxx(p: float, omega: float, x) -> np.ndarray:
    v = free_soliton(p, omega, x)
    return -omega * v - v ** p


def closed_form(p: float, gamma: float, omega: float, x) -> np.ndarray:
    """Sampled two-hump profile ``phi(x) = v(|x| - b_omega)``."""
    b = b_omega(p, gamma, omega)
    return free_soliton(p, omega, np.abs(np.asarray(x, dtype=float)) - b)


def default_grid(omega: float, n_points: int = 2001, length_scale: float = 12.0) -> Grid:
    """Full-line grid ``[-L, L]`` with ``L = length_scale / sqrt(-omega)``."""
    if n_points % 2 == 0:
        n_points += 1
    return Grid.full_line(length_scale / np.sqrt(-omega), n_points)


class DeltaNLS(Model):
    """Discrete delta-potential NLS on a full-line or sector grid.

    The delta is folded into the node-0 row of the stiffness form (an extra
    ``gamma/h`` on the diagonal of the H-operator); on the odd sector the
    origin is not a node and the potential drops out.
    """

    j_weights = (1.0,)

    def __init__(self, p: float, gamma: float, grid: Grid):
        if not p > 1:
            raise DomainError(f"need p > 1, got {p}")
        if gamma < 0:
            raise DomainError("attractive potential (gamma < 0) is not supported")
        if grid.kind not in ("full", "half-even", "half-odd"):
            raise DomainError(f"delta-nls needs a full-line or sector grid, got {grid.kind}")
        self.p = float(p)
        self.gamma = float(gamma)
        self.grid = grid
        self.point_gamma = self.gamma

    def nonlinear_energy(self, u) -> float:
        p = self.p
        return -float(np.sum(self.mass * np.abs(u) ** (p + 1))) / (p + 1)

    def nonlinear_grad(self, u) -> np.ndarray:
        return -np.abs(u) ** (self.p - 1) * u

    def nonlinear_dgrad(self, a, b) -> np.ndarray:
        # difference quotient of F(rho) = -rho^{(p+1)/2}/(p+1), rho = |u|^2:
        # conserves both charge and energy exactly.
        p = self.p
        if float(p).is_integer():
            # (B^{p+1} - A^{p+1}) / (B^2 - A^2) with A = |a|, B = |b|, expanded
            # as a geometric sum so that no cancellation occurs
            A = np.abs(a)
            B = np.abs(b)
            s = np.ones_like(A)
            pa = np.ones_like(A)
            for _ in range(int(p)):
                pa = pa * A
                s = s * B + pa
            den = (p + 1) * (A + B)
            q = -np.divide(s, den, out=np.zeros_like(A), where=den > 0)
            return q * (a + b)
        ra = a.real * a.real + a.imag * a.imag
        rb = b.real * b.real + b.imag * b.imag
        dr = rb - ra
        k = 0.5 * (p + 1)
        small = np.abs(dr) <= 1e-7 * np.maximum(np.maximum(ra, rb), 1e-300)
        with np.errstate(divide="ignore", invalid="ignore"):
            quot = (rb ** k - ra ** k) / ((p + 1) * dr)
        q = -np.where(small, 0.5 * (0.5 * (ra + rb)) ** (k - 1.0), quot)
        return q * (a + b)

    # -- linearisation ----------------------------------------------------
    def _potential(self, phi) -> np.ndarray:
        phi = np.asarray(phi)
        if np.iscomplexobj(phi):
            if np.max(np.abs(phi.imag)) > 1e-12 * max(np.max(np.abs(phi)), 1.0):
                raise DomainError("linearisation is implemented at real profiles only")
            phi = phi.real
        return np.abs(phi) ** (self.p - 1)

    def operator_L(self, omega: float, phi) -> sp.csr_matrix:
        """Form of ``L_omega`` (real directions)."""
        V = self._potential(phi)
        return (self.kinetic_form + sp.diags(self.mass * (-omega - self.p * V))).tocsr()

    def operator_M(self, omega: float, phi) -> sp.csr_matrix:
        """Form of ``M_omega`` (imaginary directions)."""
        V = self._potential(phi)
        return (self.kinetic_form + sp.diags(self.mass * (-omega - V))).tocsr()

    def hessian_forms(self, omega: float, phi) -> tuple:
        return self.operator_L(omega, phi), self.operator_M(omega, phi)

    def third_form(self, phi, psi) -> float:
        """``<S'''(phi)(psi, psi), psi>`` at a real positive profile."""
        phi = np.real(phi)
        a = np.real(psi)
        b = np.imag(psi)
        p = self.p
        return -(p - 1) * float(
            np.sum(self.mass * phi ** (p - 2) * (p * a ** 3 + 3 * a * b ** 2))
        )


@dataclass(frozen=True)
class DeltaProfile:
    """Bound state of the delta model on a given grid."""

    p: float
    gamma: float
    omega: float
    grid: Grid
    b_omega: float
    field: np.ndarray
    d_omega_field: Optional[np.ndarray] = None
    residual: float = 0.0

    @property
    def model(self) -> DeltaNLS:
        return DeltaNLS(self.p, self.gamma, self.grid)

    def sector(self, parity: str = "even") -> "DeltaProfile":
        """Restriction of a full-line profile to the even sector grid."""
        if parity != "even":
            raise DomainError("the bound state has no odd part")
        g = self.grid.sector("even")
        dphi = None if self.d_omega_field is None else fold(self.d_omega_field, "even")
        return DeltaProfile(
            self.p, self.gamma, self.omega, g, self.b_omega,
            fold(self.field, "even"), dphi, self.residual,
        )


def _sample(p, gamma, omega, grid: Grid) -> np.ndarray:
    if grid.kind not in ("full", "half-even"):
        raise DomainError("the bound state lives on a full-line or even-sector grid")
    return closed_form(p, gamma, omega, grid.x)


def polish(model: DeltaNLS, omega: float, phi, tol: float = 1e-14, max_iter: int = 30):
    """Newton iteration on the discrete stationary equation.

    Stops once the update is below ``tol`` relative to ``max|phi|``.  Returns
    the refined field and the dual norm of the remaining residual relative
    to ``||phi||_X``.
    """
    phi = np.array(np.real(phi), dtype=float)
    w = model.mass
    full = model.grid.kind == "full"
    for _ in range(max_iter):
        r = model.grad_S(omega, phi).real
        step = tridiag_solve(model.operator_L(omega, phi), w * r)
        phi = phi - step
        if full:
            phi = 0.5 * (phi + phi[::-1])
        if np.max(np.abs(step)) < tol * np.max(np.abs(phi)):
            break
    res = dual_norm(model, model.grad_S(omega, phi)) / model.norm_x(phi)
    return phi, res


def profile(
    p: float,
    gamma: float,
    omega: float,
    grid: Optional[Grid] = None,
    refine: bool = True,
    with_derivative: bool = False,
) -> DeltaProfile:
    """Bound state ``phi_omega`` sampled on ``grid``.

    With ``refine`` (default) the closed form is used as the initial guess of
    a Newton solve of the discrete equation, so the returned field is an
    exact critical point of the discrete action; the difference from the raw
    samples is O(h^2).  ``refine=False`` returns the raw samples.
    """
    check_omega(p, gamma, omega)
    if grid is None:
        grid = default_grid(omega)
    phi = _sample(p, gamma, omega, grid)
    model = DeltaNLS(p, gamma, grid)
    res = 0.0
    if refine:
        phi, res = polish(model, omega, phi)
    else:
        res = dual_norm(model, model.grad_S(omega, phi)) / model.norm_x(phi)
    dphi = profile_domega(p, gamma, omega, grid, refine=refine) if with_derivative else None
    return DeltaProfile(p, gamma, omega, grid, b_omega(p, gamma, omega), phi, dphi, res)


def profile_domega(
    p: float, gamma: float, omega: float, grid: Optional[Grid] = None,
    refine: bool = True, rel_step: float = 1e-5,
) -> np.ndarray:
    """``d phi_omega / d omega`` by a central difference in omega on a fixed grid."""
    check_omega(p, gamma, omega)
    if grid is None:
        grid = default_grid(omega)
    step = rel_step * abs(omega)
    check_omega(p, gamma, omega + step)
    plus = profile(p, gamma, omega + step, grid, refine=refine).field
    minus = profile(p, gamma, omega - step, grid, refine=refine).field
    return (plus - minus) / (2.0 * step)


def operator_L(p, gamma, omega, grid: Optional[Grid] = None, phi=None):
    """Form of ``L_omega`` at the (refined) bound state on ``grid``."""
    if phi is None:
        prof = profile(p, gamma, omega, grid)
        grid, phi = prof.grid, prof.field
    return DeltaNLS(p, gamma, grid).operator_L(omega, phi)


def operator_M(p, gamma, omega, grid: Optional[Grid] = None, phi=None):
    """Form of ``M_omega`` at the (refined) bound state on ``grid``."""
    if phi is None:
        prof = profile(p, gamma, omega, grid)
        grid, phi = prof.grid, prof.field
    return DeltaNLS(p, gamma, grid).operator_M(omega, phi)


def odd_trial_form(p: float, gamma: float, omega: float, s: float) -> float:
    """``<L_omega psi_s, psi_s>`` for the odd trial function built from ``v'``
    placed at ``|x| > b_omega + s``.

    Both half-lines contribute equally, hence the factor 2; the delta term
    vanishes because ``psi_s(0) = 0``.
    """
    b = b_omega(p, gamma, omega)
    if not s > -b:
        raise DomainError(f"need s > -b_omega = {-b}")

    def integrand(y):
        d1 = free_soliton_dx(p, omega, y)
        d2 = free_soliton_dxx(p, omega, y)
        v = free_soliton(p, omega, y + s)
        return d2 ** 2 - omega * d1 ** 2 - p * v ** (p - 1) * d1 ** 2

    return 2.0 * _half_line_quad(integrand, omega)


def odd_trial_form_derivative(p: float, gamma: float, omega: float, s: float) -> float:
    """Derivative of :func:`odd_trial_form` in ``s`` from the differentiated integrand."""
    b = b_omega(p, gamma, omega)
    if not s > -b:
        raise DomainError(f"need s > -b_omega = {-b}")

    def integrand(y):
        v = free_soliton(p, omega, y + s)
        return v ** (p - 2) * free_soliton_dx(p, omega, y + s) * free_soliton_dx(p, omega, y) ** 2

    return -2.0 * p * (p - 1) * _half_line_quad(integrand, omega)


def _half_line_quad(f, omega: float) -> float:
    # integrand decays like exp(-2 sqrt(-omega) y); split to keep quad accurate
    scale = 1.0 / np.sqrt(-omega)
    cuts = [0.0, 2 * scale, 8 * scale, 40 * scale]
    total = 0.0
    with warnings.catch_warnings():
        # the tolerances sit at the rounding floor on purpose
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        for a, b in zip(cuts[:-1], cuts[1:]):
            total += integrate.quad(f, a, b, epsabs=1e-15, epsrel=1e-13, limit=200)[0]
    return total
