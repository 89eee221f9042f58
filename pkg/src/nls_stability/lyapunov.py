"""
Phase alignment and the Lyapunov functionals of the instability argument.

For a state ``u`` near the orbit of ``phi`` the phase ``theta(u)`` minimises
``||T(s) u - phi||_X``; with ``M(u) = T(theta(u)) u``::

    A(u)      = (M(u), J^{-1} psi)_H
    Lambda(u) = (M(u), psi)_H
    P(u)      = <S'(M), psi> - Lambda(u) <S'(M), J I^{-1} R J phi> / (M, J^2 phi)_X

and along solutions ``dA/dt = -P``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import minimize_scalar

from .core import DomainError, Model

N_SEED = 64
TWO_PI = 2.0 * np.pi


class TubeExitError(RuntimeError):
    """The state lies outside the tube around the orbit."""

    def __init__(self, distance: float, radius: float):
        super().__init__(f"tube distance {distance:.6g} exceeds radius {radius:.6g}")
        self.distance = distance
        self.radius = radius


class AlignmentSingularError(RuntimeError):
    """The denominator ``(M(u), J^2 phi)_X`` is too small."""


def default_tube_radius(model: Model, phi) -> float:
    return 0.05 * model.norm_x(phi)


# -- phase geometry ----------------------------------------------------------

class PhaseDistance:
    """``f(s) = ||T(s) u - phi||_X^2`` as a trigonometric polynomial in ``s``."""

    def __init__(self, model: Model, u, phi):
        u = model.check(u)
        phi = model.check(phi)
        G = model.x_form
        uu = np.atleast_2d(u)
        pp = np.atleast_2d(phi)
        self.weights = np.asarray(model.j_weights, dtype=float)
        # c_k = (u_k, phi_k)_X as a complex number
        self.c = np.array([np.conj(b) @ (G @ a.real) + 1j * (np.conj(b) @ (G @ a.imag))
                           for a, b in zip(uu, pp)])
        self.const = model.norm_x(u) ** 2 + model.norm_x(phi) ** 2

    def __call__(self, s: float) -> float:
        return float(self.const - 2.0 * np.sum(np.real(np.exp(1j * self.weights * s) * self.c)))

    def d1(self, s: float) -> float:
        return float(-2.0 * np.sum(np.real(1j * self.weights * np.exp(1j * self.weights * s) * self.c)))

    def d2(self, s: float) -> float:
        return float(2.0 * np.sum(np.real(self.weights ** 2 * np.exp(1j * self.weights * s) * self.c)))

    def minimise(self, newton: bool = True) -> tuple:
        """64-sample scan, golden-section refinement, optional Newton polish.

        Returns ``(s, f(s))`` with ``s`` in ``[0, 2 pi)``.
        """
        grid = np.arange(N_SEED) * TWO_PI / N_SEED
        vals = np.array([self(s) for s in grid])
        j = int(np.argmin(vals))
        step = TWO_PI / N_SEED
        res = minimize_scalar(self, bracket=(grid[j] - step, grid[j], grid[j] + step),
                              method="golden", tol=1e-10)
        s = float(res.x)
        fs = self(s)
        if newton:
            # f is flat at the minimum, so compare values only for large steps
            noise = 1e-12 * max(self.const, 1e-300)
            for _ in range(20):
                h = self.d2(s)
                if h <= 0:
                    break
                delta = -self.d1(s) / h
                if abs(delta) > step:
                    break
                ft = self(s + delta)
                if ft > fs + noise:
                    break
                s, fs = s + delta, ft
                if abs(delta) < 1e-15:
                    break
        return float(np.mod(s, TWO_PI)), max(fs, 0.0)


def tube_distance(model: Model, u, phi) -> float:
    """``inf_s ||u - T(s) phi||_X``."""
    # ||u - T(s) phi|| = ||T(-s) u - phi||
    s, _ = PhaseDistance(model, u, phi).minimise()
    return model.norm_x(model.apply_T(s, u) - np.asarray(phi))


def phase(model: Model, u, phi) -> float:
    """``theta(u)`` in ``[0, 2 pi)``."""
    return PhaseDistance(model, u, phi).minimise()[0]


# -- functionals -----------------------------------------------------------------

@dataclass(frozen=True)
class AlignedState:
    theta: float
    m_field: np.ndarray
    a_value: float
    lambda_value: float
    p_value: float
    distance: float


class Lyapunov:
    """Precomputed pieces of ``A``, ``Lambda`` and ``P`` for one ``(phi, psi)``."""

    def __init__(self, model: Model, omega: float, phi, psi,
                 tube_radius: Optional[float] = None, tol_singular: float = 1e-12):
        self.model = model
        self.omega = float(omega)
        self.phi = np.asarray(model.check(phi), dtype=complex)
        self.psi = np.asarray(model.check(psi), dtype=complex)
        self.j_inv_psi = model.apply_J_inv(self.psi)
        jphi = model.apply_J(self.phi)
        self.j2phi = model.apply_J(jphi)
        # J I^{-1} R J phi, as an H-representative
        self.z = model.apply_J(model.riesz_H(model.riesz_X(jphi)))
        self.radius = default_tube_radius(model, self.phi) if tube_radius is None else tube_radius
        self.tol_singular = tol_singular

    def align(self, u, check_tube: bool = True) -> AlignedState:
        m = self.model
        theta, _ = PhaseDistance(m, u, self.phi).minimise()
        M = m.apply_T(theta, u)
        dist = m.norm_x(M - self.phi)
        if check_tube and dist >= self.radius:
            raise TubeExitError(dist, self.radius)
        a_val = m.inner_h(M, self.j_inv_psi)
        lam = m.inner_h(M, self.psi)
        p_val = self.p_of_aligned(M, lam)
        return AlignedState(theta, M, a_val, lam, p_val, dist)

    def p_of_aligned(self, M, lam: Optional[float] = None) -> float:
        m = self.model
        if lam is None:
            lam = m.inner_h(M, self.psi)
        denom = m.inner_x(M, self.j2phi)
        if abs(denom) < self.tol_singular * m.norm_x(self.phi) ** 2:
            raise AlignmentSingularError(f"(M, J^2 phi)_X = {denom:.3g}")
        gs = m.grad_S(self.omega, M)
        return m.inner_h(gs, self.psi) - lam * m.inner_h(gs, self.z) / denom


def align(model: Model, omega: float, phi, psi, u, tube_radius: Optional[float] = None) -> AlignedState:
    """Phase-align ``u`` and evaluate ``A``, ``Lambda`` and ``P``."""
    return Lyapunov(model, omega, phi, psi, tube_radius).align(u)


def energy_gap(model: Model, omega: float, phi, psi, u, tol_q: float = 1e-10,
               tube_radius: Optional[float] = None) -> float:
    """``E(u) - E(phi) - Lambda(u) P(u)`` for a state with the charge of ``phi``."""
    q0 = model.charge(phi)
    if abs(model.charge(u) - q0) > tol_q * abs(q0):
        raise DomainError("u must carry the charge of phi")
    st = align(model, omega, phi, psi, u, tube_radius)
    return model.energy(u) - model.energy(phi) - st.lambda_value * st.p_value


def degenerate_energy_gap(model: Model, omega: float, phi, psi, nu: float, kstar: float, u,
               tol_q: float = 1e-10, tube_radius: Optional[float] = None) -> float:
    """``E(u) - E(phi) - sign(nu) k* P(u)`` for a state with the charge of ``phi``."""
    q0 = model.charge(phi)
    if abs(model.charge(u) - q0) > tol_q * abs(q0):
        raise DomainError("u must carry the charge of phi")
    st = align(model, omega, phi, psi, u, tube_radius)
    return model.energy(u) - model.energy(phi) - np.sign(nu) * kstar * st.p_value


def charge_normalise(model: Model, u, phi) -> np.ndarray:
    """Rescale ``u`` to the charge of ``phi``."""
    return np.asarray(u) * np.sqrt(model.charge(phi) / model.charge(u))


def test_curve(model: Model, omega: float, phi, psi, lam: float, variant: str = "negative") -> np.ndarray:
    """``phi + lam psi + sigma(lam) phi`` with ``sigma`` fixing the charge.

    ``variant`` (``"negative"`` for a negative direction, ``"degenerate"`` for the
    degenerate direction) only labels the use; the curve is the same.
    """
    if variant not in ("negative", "degenerate"):
        raise ValueError(f"unknown variant {variant!r}")
    rad = 1.0 - model.charge(psi) / model.charge(phi) * lam ** 2
    if rad <= 0:
        raise DomainError(f"lambda={lam} too large for the charge constraint")
    sigma = np.sqrt(rad) - 1.0
    return np.asarray(phi) + lam * np.asarray(psi) + sigma * np.asarray(phi)


test_curve.__test__ = False  # not a pytest test


@dataclass(frozen=True)
class CubicFit:
    coefficient: float
    expected: float
    relative_error: float
    lambdas: np.ndarray


def cubic_coefficient(model: Model, omega: float, phi, psi, nu: float,
                      lambdas=(0.01, 0.02, 0.03, 0.04, 0.05, 0.06, 0.07, 0.08)) -> CubicFit:
    """Fit the odd part of ``S(phi_lam) - S(phi)`` with ``c3 lam^3 + c5 lam^5``
    and compare ``c3`` with ``-nu/6``."""
    lam = np.asarray(lambdas, dtype=float)
    s0 = model.action(omega, phi)
    plus = np.array([model.action(omega, test_curve(model, omega, phi, psi, x, "degenerate")) - s0 for x in lam])
    minus = np.array([model.action(omega, test_curve(model, omega, phi, psi, -x, "degenerate")) - s0 for x in lam])
    odd = 0.5 * (plus - minus)
    V = np.column_stack([lam ** 3, lam ** 5])
    coef, *_ = np.linalg.lstsq(V, odd, rcond=None)
    expected = -nu / 6.0
    return CubicFit(float(coef[0]), float(expected),
                    float(abs(coef[0] - expected) / abs(expected)), lam)
