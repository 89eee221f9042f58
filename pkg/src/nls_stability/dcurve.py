"""
The slope function ``d(omega) = S_omega(phi_omega)`` of the delta model,
its derivatives and the critical frequency where ``d''`` changes sign.
"""

from __future__ import annotations

from dataclasses import dataclass, asdict
from typing import Optional

import numpy as np

from .core import DomainError, Grid
from .delta import DeltaNLS, check_omega, default_grid, profile, profile_domega

DEFAULT_N = 4001


class NotFoundError(RuntimeError):
    """No sign change of ``d''`` inside the swept frequency range."""


@dataclass(frozen=True)
class DCurveRow:
    omega: float
    d: float
    d1: float
    d2: float
    d3: float
    charge: float
    d2_identity: float
    d3_identity: float
    resid_d1: float
    resid_d2: float
    resid_d3: float

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class CriticalOmega:
    p: float
    gamma: float
    omega_star: float
    d2_bracket: tuple
    d2_at_star: float
    d3_at_star: float
    d_at_star: float

    def as_dict(self) -> dict:
        out = asdict(self)
        out["d2_bracket"] = list(self.d2_bracket)
        return out


def d_value(p: float, gamma: float, omega: float, grid: Optional[Grid] = None,
            n_points: int = DEFAULT_N) -> float:
    """``S_omega(phi_omega)`` on ``grid`` (default ``L = 12/sqrt(-omega)``)."""
    check_omega(p, gamma, omega)
    if grid is None:
        grid = default_grid(omega, n_points)
    prof = profile(p, gamma, omega, grid)
    return prof.model.action(omega, prof.field)


def d2_identity(p: float, gamma: float, omega: float, grid: Optional[Grid] = None,
                n_points: int = DEFAULT_N) -> float:
    """``d''(omega) = -(phi_omega, phi_omega')_H``."""
    check_omega(p, gamma, omega)
    if grid is None:
        grid = default_grid(omega, n_points)
    prof = profile(p, gamma, omega, grid)
    dphi = profile_domega(p, gamma, omega, grid)
    return -prof.model.inner_h(prof.field, dphi)


def _stencil(values, step):
    fm2, fm1, f0, fp1, fp2 = values
    d1 = (fm2 - 8 * fm1 + 8 * fp1 - fp2) / (12 * step)
    d2 = (-fm2 + 16 * fm1 - 30 * f0 + 16 * fp1 - fp2) / (12 * step ** 2)
    d3 = (fp2 - 2 * fp1 + 2 * fm1 - fm2) / (2 * step ** 3)
    return d1, d2, d3


def d_derivatives(p: float, gamma: float, omega: float, grid: Optional[Grid] = None,
                  n_points: int = DEFAULT_N, rel_step: float = 1e-3) -> DCurveRow:
    """``d, d', d'', d'''`` from five-point stencils on one fixed grid, and
    the residuals of the identities ``d' = -Q``, ``d'' = -(phi, phi')_H`` and
    ``d''' = <S'''(phi', phi'), phi'> - 3 ||phi'||_H^2``.
    """
    check_omega(p, gamma, omega)
    step = rel_step * abs(omega)
    if not omega + 2 * step < -gamma ** 2 / 4:
        raise DomainError(f"stencil around omega={omega} leaves Omega")
    if grid is None:
        grid = default_grid(omega, n_points)
    values = [d_value(p, gamma, omega + k * step, grid) for k in (-2, -1, 0, 1, 2)]
    d1, d2, d3 = _stencil(values, step)

    prof = profile(p, gamma, omega, grid)
    model = prof.model
    phi = prof.field
    dphi = profile_domega(p, gamma, omega, grid)
    q = model.charge(phi)
    d2_id = -model.inner_h(phi, dphi)
    d3_id = model.third_form(phi, dphi) - 3.0 * model.inner_h(dphi, dphi)
    return DCurveRow(
        omega=float(omega), d=float(values[2]), d1=float(d1), d2=float(d2), d3=float(d3),
        charge=float(q), d2_identity=float(d2_id), d3_identity=float(d3_id),
        resid_d1=float(abs(d1 + q)), resid_d2=float(abs(d2 - d2_id)),
        resid_d3=float(abs(d3 - d3_id)),
    )


def sweep(p: float, gamma: float, omegas, n_points: int = DEFAULT_N) -> list:
    """``DCurveRow`` for each frequency (rows are independent)."""
    return [d_derivatives(p, gamma, float(w), n_points=n_points) for w in omegas]


def omega_sweep(gamma: float, n: int = 40, near: float = 1.05, far: float = 1e3) -> np.ndarray:
    """Geometric grid from ``-gamma^2/4 * near`` down to ``-gamma^2/4 * far``."""
    edge = gamma ** 2 / 4
    return -edge * np.geomspace(near, far, n)


def find_omega_star(p: float, gamma: float, n_sweep: int = 40, n_points: int = DEFAULT_N,
                    rtol: float = 1e-8, max_iter: int = 200) -> CriticalOmega:
    """Locate the zero of ``d''`` by a logarithmic sweep plus bisection.

    ``d''`` is evaluated through ``-(phi, phi')_H`` on the default grid of
    each frequency.
    """
    if gamma <= 0:
        raise DomainError("the critical frequency needs gamma > 0")
    omegas = omega_sweep(gamma, n_sweep)
    vals = [d2_identity(p, gamma, w, n_points=n_points) for w in omegas]
    bracket = None
    for (w0, v0), (w1, v1) in zip(zip(omegas, vals), zip(omegas[1:], vals[1:])):
        if np.sign(v0) != np.sign(v1):
            bracket = (w0, v0, w1, v1)
            break
    if bracket is None:
        raise NotFoundError(
            f"d'' keeps one sign on [{omegas[-1]:.4g}, {omegas[0]:.4g}] for p={p}, gamma={gamma}"
        )
    a, fa, b, fb = bracket
    initial = (float(min(a, b)), float(max(a, b)))
    mid, fm = a, fa
    for _ in range(max_iter):
        mid = 0.5 * (a + b)
        fm = d2_identity(p, gamma, mid, n_points=n_points)
        scale = abs(d_value(p, gamma, mid, n_points=n_points))
        if abs(fm) < rtol * scale or abs(b - a) < 1e-14 * abs(mid):
            break
        if np.sign(fm) == np.sign(fa):
            a, fa = mid, fm
        else:
            b, fb = mid, fm
    row = d_derivatives(p, gamma, mid, n_points=n_points)
    return CriticalOmega(
        p=float(p), gamma=float(gamma), omega_star=float(mid), d2_bracket=initial,
        d2_at_star=float(fm), d3_at_star=float(row.d3_identity), d_at_star=float(row.d),
    )
