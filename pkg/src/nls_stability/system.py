"""
Two-component NLS system with quadratic coupling on radial grids.

The energy is::

    E(u) = 1/2 ||grad u1||^2 + 1/2 ||grad u2||^2 - 1/3 ||u1||_3^3 - 1/3 ||u2||_3^3
           - gamma/2 Re int u1^2 conj(u2)

with ``J u = (i u1, 2i u2)`` and ``T(s) u = (e^{is} u1, e^{2is} u2)``.  Bound
states bifurcating from the semitrivial branch ``(0, varphi)`` are
``(alpha varphi, beta varphi)`` where ``varphi`` solves
``-Lap varphi - omega varphi - varphi^2 = 0``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional

import numpy as np
import scipy.sparse as sp
from scipy.integrate import solve_ivp

from .core import DomainError, Grid, Model, tridiag_solve
from .spectral import (
    ConditionReport,
    SpectrumReport,
    check_A1,
    check_A2a,
    check_A3,
    constrained_pencil_min,
    spectrum,
)


class ShootingError(RuntimeError):
    """The shooting bracket for the radial ground state could not be found."""


# -- coupling coefficients ---------------------------------------------------

@dataclass(frozen=True)
class CouplingCoefficients:
    gamma: float
    alpha: float
    beta: float

    def identity_residuals(self) -> tuple:
        a, b, g = self.alpha, self.beta, self.gamma
        return abs(a) + g * b - 1.0, g * a * a + 2 * abs(b) * b - 2 * b

    @property
    def a_real(self) -> float:
        """Coefficient ``(2 - gamma) beta`` of the second real-part block."""
        return (2.0 - self.gamma) * self.beta

    @property
    def a_imag(self) -> float:
        """Coefficient ``(1 - 2 gamma) beta`` of the second imaginary-part block."""
        return (1.0 - 2.0 * self.gamma) * self.beta

    def as_dict(self) -> dict:
        return {"gamma": self.gamma, "alpha": self.alpha, "beta": self.beta}


def coefficients(gamma: float) -> CouplingCoefficients:
    """``(alpha, beta)`` of the bifurcating branch, for ``0 < gamma <= 1``."""
    if not 0 < gamma <= 1:
        raise DomainError(f"coefficients need 0 < gamma <= 1, got {gamma}")
    if gamma == 1:
        return CouplingCoefficients(1.0, 0.0, 1.0)
    root = np.sqrt(1 + 2 * gamma * (gamma - 1))
    den = 2 + gamma ** 3
    alpha = (2 - gamma - gamma * root) / den
    beta = (1 + gamma ** 2 + root) / den
    return CouplingCoefficients(float(gamma), float(alpha), float(beta))


def mixing_matrices(c: CouplingCoefficients) -> tuple:
    """Orthogonal ``A`` (entries ``alpha, beta``) and ``B`` (``alpha, 2 beta``)."""
    a, b = c.alpha, c.beta
    A = np.array([[a, b], [-b, a]]) / np.hypot(a, b)
    B = np.array([[a, 2 * b], [-2 * b, a]]) / np.hypot(a, 2 * b)
    return A, B


# -- scalar ground state -----------------------------------------------------

def default_grid(omega: float, dimension: int = 1, n_points: int = 1000,
                 length_scale: float = 25.0) -> Grid:
    if not omega < 0:
        raise DomainError(f"need omega < 0, got {omega}")
    return Grid.radial(length_scale / np.sqrt(-omega), n_points, dimension)


def _radial_operator(grid: Grid, omega: float, potential) -> sp.csr_matrix:
    """Form of ``-Lap - omega - potential`` on a radial grid."""
    return (grid.stiffness + sp.diags(grid.mass * (-omega - potential))).tocsr()


def _shoot(phi0: float, dimension: int, r_max: float) -> int:
    """+1 if the scaled profile crosses zero, -1 if it turns up, 0 otherwise.

    Scaled equation ``Phi'' + (N-1)/r Phi' - Phi + Phi^2 = 0``.
    """
    k = dimension - 1

    def rhs(r, y):
        return [y[1], -k / r * y[1] + y[0] - y[0] ** 2]

    def cross(r, y):
        return y[0]

    def turn(r, y):
        return y[1]

    cross.terminal = True
    cross.direction = -1
    turn.terminal = True
    turn.direction = 1
    r0 = 1e-6
    curv = (phi0 - phi0 ** 2) / dimension  # Phi''(0)
    y0 = [phi0 + 0.5 * curv * r0 ** 2, curv * r0]
    sol = solve_ivp(rhs, (r0, r_max), y0, events=(cross, turn), rtol=1e-12, atol=1e-14)
    if sol.t_events[0].size:
        return 1
    if sol.t_events[1].size:
        return -1
    return 0


@lru_cache(maxsize=8)
def shoot_central_value(dimension: int, r_max: float = 30.0, tol: float = 1e-12) -> float:
    """Central value of the scaled positive radial solution by bisection."""
    if dimension == 1:
        return 1.5
    lo, hi = 0.1, 10.0
    for _ in range(20):
        if _shoot(lo, dimension, r_max) < 0 and _shoot(hi, dimension, r_max) > 0:
            break
        lo, hi = lo / 2, hi * 2
    else:
        raise ShootingError("could not bracket the ground state")
    while hi - lo > tol * hi:
        mid = 0.5 * (lo + hi)
        if _shoot(mid, dimension, r_max) > 0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def _shoot_profile(central: float, dimension: int, r) -> np.ndarray:
    k = dimension - 1

    def rhs(s, y):
        return [y[1], -k / s * y[1] + y[0] - y[0] ** 2]

    r0 = 1e-6
    curv = (central - central ** 2) / dimension
    y0 = [central + 0.5 * curv * r0 ** 2, curv * r0]
    r = np.asarray(r)
    sol = solve_ivp(rhs, (r0, r[-1]), y0, dense_output=True, rtol=1e-12, atol=1e-14)
    out = sol.sol(np.clip(r, r0, None))[0]
    # past the turning region the shot diverges; fall back to the exponential tail
    bad = np.nonzero((out <= 0) | (np.gradient(out, r) > 0))[0]
    if bad.size:
        j = max(bad[0] - 1, 1)
        tail = out[j - 1] * np.exp(-(r[j:] - r[j - 1])) * (r[j - 1] / r[j:]) ** (0.5 * k)
        out[j:] = tail
    return out


@dataclass(frozen=True)
class GroundState2:
    varphi: np.ndarray
    omega: float
    dimension: int
    grid: Grid
    central_value: float
    residual: float


def ground_state(omega: float, dimension: int = 1, grid: Optional[Grid] = None,
                 n_points: int = 1000, refine: bool = True) -> GroundState2:
    """Positive radial solution of ``-Lap phi - omega phi - phi^2 = 0``.

    ``N = 1`` starts from ``(-3 omega / 2) sech^2(sqrt(-omega) r / 2)``;
    ``N = 3`` from a shooting solution.  The sample is then Newton-refined
    on the radial grid so that it solves the discrete equation.
    """
    if not omega < 0:
        raise DomainError(f"need omega < 0, got {omega}")
    if dimension not in (1, 2, 3):
        raise DomainError("dimension must be 1, 2 or 3")
    if grid is None:
        grid = default_grid(omega, dimension, n_points)
    if grid.kind != "radial" or grid.dimension != dimension:
        raise DomainError("ground state needs a radial grid of the same dimension")
    k = np.sqrt(-omega)
    r = grid.x
    if dimension == 1:
        central = 1.5
        phi = -1.5 * omega / np.cosh(0.5 * k * r) ** 2
    else:
        central = shoot_central_value(dimension)
        phi = -omega * _shoot_profile(central, dimension, k * r)
    w = grid.mass
    if refine:
        for _ in range(50):
            res = (grid.stiffness @ phi) / w - omega * phi - phi ** 2
            step = tridiag_solve(_radial_operator(grid, omega, 2 * phi), w * res)
            phi = phi - step
            if np.max(np.abs(step)) < 1e-14 * np.max(np.abs(phi)):
                break
    res = (grid.stiffness @ phi) / w - omega * phi - phi ** 2
    g = w * res
    G = grid.stiffness + sp.diags(w)
    rel = float(np.sqrt(max(g @ tridiag_solve(G, g), 0.0)) / np.sqrt(phi @ (G @ phi)))
    return GroundState2(phi, float(omega), dimension, grid, float(-omega * central), rel)


# -- the two-component model -------------------------------------------------

class SystemNLS(Model):
    """Discrete two-component model on a radial grid."""

    j_weights = (1.0, 2.0)

    def __init__(self, gamma: float, grid: Grid):
        if not gamma > 0:
            raise DomainError("system-nls needs gamma > 0")
        if grid.kind != "radial":
            raise DomainError("system-nls lives on a radial grid")
        if grid.dimension > 3:
            raise DomainError("system-nls needs N <= 3")
        self.gamma = float(gamma)
        self.grid = grid

    def nonlinear_energy(self, u) -> float:
        u1, u2 = u
        w = self.mass
        cubic = np.sum(w * (np.abs(u1) ** 3 + np.abs(u2) ** 3)) / 3.0
        coupling = 0.5 * self.gamma * np.sum(w * np.real(u1 ** 2 * np.conj(u2)))
        return -float(cubic + coupling)

    def nonlinear_grad(self, u) -> np.ndarray:
        u1, u2 = u
        g = self.gamma
        return np.array([
            -np.abs(u1) * u1 - g * np.conj(u1) * u2,
            -np.abs(u2) * u2 - 0.5 * g * u1 ** 2,
        ])

    def hessian_forms(self, omega: float, phi) -> tuple:
        """Block forms at a real state ``(phi1, phi2)``."""
        phi = np.real(np.asarray(phi))
        p1, p2 = phi
        g = self.gamma
        K = self.kinetic_form
        w = self.mass
        D = lambda v: sp.diags(w * v)  # noqa: E731
        LR = sp.bmat([
            [K + D(-omega - 2 * np.abs(p1) - g * p2), D(-g * p1)],
            [D(-g * p1), K + D(-omega - 2 * np.abs(p2))],
        ])
        LI = sp.bmat([
            [K + D(-omega - np.abs(p1) + g * p2), D(-g * p1)],
            [D(-g * p1), K + D(-omega - np.abs(p2))],
        ])
        return LR.tocsr(), LI.tocsr()

    def third_form(self, phi, psi) -> float:
        raise NotImplementedError("the cubic form is not evaluated for the system")

    def solve_x_form(self, rhs) -> np.ndarray:
        return tridiag_solve(self.x_form, rhs)


def bound_state(gamma: float, ground: GroundState2) -> np.ndarray:
    """``(alpha varphi, beta varphi)`` as a complex two-component field."""
    c = coefficients(gamma)
    return np.array([c.alpha * ground.varphi, c.beta * ground.varphi], dtype=complex)


def semitrivial_state(ground: GroundState2) -> np.ndarray:
    return np.array([np.zeros_like(ground.varphi), ground.varphi], dtype=complex)


def operator_La(ground: GroundState2, a: float) -> sp.csr_matrix:
    """Form of ``L_a = -Lap - omega - a varphi``."""
    return _radial_operator(ground.grid, ground.omega, a * ground.varphi)


# -- diagonalisation -----------------------------------------------------------

@dataclass(frozen=True)
class OperatorsRI:
    L_R: sp.csr_matrix
    L_I: sp.csr_matrix
    A: np.ndarray
    B: np.ndarray
    residual_R: float
    residual_I: float
    degenerate: bool


def _probe_residual(M, N, n_probe: int = 8, seed: int = 0) -> float:
    """``max ||(M - N) v|| / ||M v||`` over random probes."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_probe):
        v = rng.standard_normal(M.shape[0])
        worst = max(worst, np.linalg.norm(M @ v - N @ v) / np.linalg.norm(M @ v))
    return float(worst)


def operators_RI(gamma: float, omega: float, dimension: int = 1,
                 grid: Optional[Grid] = None, n_points: int = 1000) -> OperatorsRI:
    """Real/imaginary block forms and their diagonalisation by ``A`` and ``B``."""
    c = coefficients(gamma)
    ground = ground_state(omega, dimension, grid, n_points)
    model = SystemNLS(gamma, ground.grid)
    LR, LI = model.hessian_forms(omega, bound_state(gamma, ground))
    A, B = mixing_matrices(c)
    n = ground.grid.n_points
    I = sp.identity(n)
    Ak = sp.kron(A, I).tocsr()
    Bk = sp.kron(B, I).tocsr()
    DR = sp.block_diag([operator_La(ground, 2.0), operator_La(ground, c.a_real)])
    DI = sp.block_diag([operator_La(ground, 1.0), operator_La(ground, c.a_imag)])
    res_r = _probe_residual(LR, Ak.T @ DR @ Ak)
    res_i = _probe_residual(LI, Bk.T @ DI @ Bk)
    return OperatorsRI(LR, LI, A, B, res_r, res_i, bool(c.alpha == 0.0))


# -- scalar operator classification --------------------------------------------

@dataclass(frozen=True)
class LaClassification:
    a: float
    case: str
    holds: bool
    spectrum: SpectrumReport
    scalars: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {"a": self.a, "case": self.case, "holds": self.holds,
                "spectrum": self.spectrum.as_dict(),
                "scalars": {k: float(v) for k, v in self.scalars.items()}}


def classify_La(omega: float, dimension: int, a: float, grid: Optional[Grid] = None,
                n_points: int = 1000, ground: Optional[GroundState2] = None) -> LaClassification:
    """Negative-eigenvalue count and constrained positivity of ``L_a``.

    Cases: ``a = 2`` one negative eigenvalue; ``a = 1`` non-negative with
    kernel ``varphi``; ``a < 1`` positive definite; ``1 < a < 2`` one
    negative eigenvalue, ``<L_a varphi, varphi> < 0`` and positivity on
    ``{varphi}^perp``.
    """
    if ground is None:
        ground = ground_state(omega, dimension, grid, n_points)
    g = ground.grid
    w = g.mass
    L = operator_La(ground, a)
    rep = spectrum(L, w, f"L_{a:g}", k=4)
    vals = rep.eigenvalues
    tol = rep.tol_kernel
    phi = ground.varphi
    sc = {"lambda0": vals[0], "lambda1": vals[1]}
    G = g.stiffness + sp.diags(w)

    def constrained_positive() -> float:
        v, _ = constrained_pencil_min(L, G, [w * phi])
        return float(v[0])

    if a == 1.0:
        v0 = rep.eigenvectors[0]
        cos = abs(np.sum(w * v0 * phi)) / np.sqrt(np.sum(w * v0 ** 2) * np.sum(w * phi ** 2))
        c = constrained_positive()
        sc.update({"cosine_to_varphi": cos, "constrained_min": c})
        holds = abs(vals[0]) < 1e-6 and cos > 0.999 and vals[1] > tol and c > 0
        case = "kernel"
    elif a == 2.0:
        c = constrained_positive()
        sc["constrained_min"] = c
        holds = rep.n_negative == 1 and vals[1] > tol and c > 0
        case = "one-negative"
    elif a < 1:
        holds = vals[0] > tol
        case = "positive-definite"
    elif a < 2:
        form = float(phi @ (L @ phi)) / float(np.sum(w * phi ** 2))
        c = constrained_positive()
        sc.update({"form_varphi": form, "constrained_min": c})
        holds = rep.n_negative == 1 and form < 0 and c > 0
        case = "one-negative-positive-on-complement"
    else:
        holds = rep.n_negative >= 1
        case = "unclassified"
    return LaClassification(float(a), case, bool(holds), rep, sc)


# -- instability conditions ------------------------------------------------------

def check_instability_conditions(gamma: float, omega: float, dimension: int = 1,
                                 grid: Optional[Grid] = None, n_points: int = 1000) -> list:
    """A1, A2a (with its closed-form value), the two block positivity
    statements and A3 for the bifurcating bound state, ``0 < gamma < 1``."""
    if not 0 < gamma < 1:
        raise DomainError("instability conditions are checked for 0 < gamma < 1")
    c = coefficients(gamma)
    ground = ground_state(omega, dimension, grid, n_points)
    model = SystemNLS(gamma, ground.grid)
    phi = bound_state(gamma, ground)
    vphi = ground.varphi
    w = ground.grid.mass
    xi = np.array([-c.beta * vphi, c.alpha * vphi], dtype=complex)
    psi = xi / model.norm_h(xi)
    eta = np.array([c.alpha * vphi, 2 * c.beta * vphi], dtype=complex)

    a2a = check_A2a(model, omega, phi, psi)
    closed = float(vphi @ (operator_La(ground, c.a_real) @ vphi)) / float(np.sum(w * vphi ** 2))
    a2a.scalars["closed_form_value"] = closed
    a2a.scalars["closed_form_difference"] = abs(a2a.scalars["form_value"] - closed)

    LR, LI = model.hessian_forms(omega, phi)
    G = model.flat_x_form()
    fw = model.flat_mass()
    k1, _ = constrained_pencil_min(LR, G, [fw * phi.real.reshape(-1), fw * xi.real.reshape(-1)])
    k2, _ = constrained_pencil_min(LI, G, [fw * eta.real.reshape(-1)])
    return [
        check_A1(model, omega, phi),
        a2a,
        ConditionReport("real-block", bool(k1[0] > 0), None, {"k1_estimate": float(k1[0])}),
        ConditionReport("imag-block", bool(k2[0] > 0), None, {"k2_estimate": float(k2[0])}),
        check_A3(model, omega, phi, psi),
    ]


def semitrivial_degeneracy(omega: float, dimension: int = 1, grid: Optional[Grid] = None,
                           n_points: int = 1000) -> list:
    """At ``gamma = 1`` the linearisation at ``(0, varphi)`` has a
    two-dimensional kernel ``{J(0, varphi), (varphi, 0)}`` and the coercivity
    condition holds with ``psi = (varphi, 0)/||varphi||``."""
    ground = ground_state(omega, dimension, grid, n_points)
    model = SystemNLS(1.0, ground.grid)
    phi = semitrivial_state(ground)
    vphi = ground.varphi
    LR, LI = model.hessian_forms(omega, phi)
    fw = model.flat_mass()
    sr = spectrum(LR, fw, "real", k=3)
    si = spectrum(LI, fw, "imag", k=3)
    tol = max(sr.tol_kernel, si.tol_kernel)
    kernel = [(v, "real") for lam, v in zip(sr.eigenvalues, sr.eigenvectors) if abs(lam) <= tol]
    kernel += [(v, "imag") for lam, v in zip(si.eigenvalues, si.eigenvectors) if abs(lam) <= tol]
    n_neg = int(np.sum(sr.eigenvalues < -tol) + np.sum(si.eigenvalues < -tol))

    def cosine(v, target) -> float:
        t = target.reshape(-1)
        return abs(np.sum(fw * v * t)) / np.sqrt(np.sum(fw * v * v) * np.sum(fw * t * t))

    target_real = np.array([vphi, 0 * vphi])
    target_imag = np.array([0 * vphi, vphi])
    cos_r = max((cosine(v, target_real) for v, part in kernel if part == "real"), default=0.0)
    cos_i = max((cosine(v, target_imag) for v, part in kernel if part == "imag"), default=0.0)
    psi = np.array([vphi, 0 * vphi], dtype=complex)
    psi /= model.norm_h(psi)
    return [
        ConditionReport("kernel", bool(len(kernel) == 2 and cos_r > 0.999 and cos_i > 0.999),
                        None, {"kernel_dim_est": len(kernel), "cosine_phi_0": cos_r,
                               "cosine_J_0_phi": cos_i, "n_negative": n_neg}),
        check_A1(model, omega, phi),
        check_A3(model, omega, phi, psi),
    ]
