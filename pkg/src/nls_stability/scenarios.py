"""
Ready-made initial data for the trajectory experiments.

Each scenario bundles a discrete model, a bound state ``phi``, the direction
``psi`` used by the Lyapunov diagnostics and a perturbed initial state.  The
perturbation amplitude is measured in the H norm: directions are
H-normalised before scaling.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import ndimage

from .core import DomainError, Model, fold
from .lyapunov import test_curve

INSTABILITY_SETTINGS = ("negative-slope", "odd-mode", "critical-slope")
DIRECTIONS = ("psi", "chi1", "phi-prime", "random")


@dataclass
class Scenario:
    name: str
    model: Model
    omega: float
    phi: np.ndarray
    psi: Optional[np.ndarray]
    u0: np.ndarray
    amplitude: float
    meta: dict


def _unit(model: Model, v) -> np.ndarray:
    v = np.asarray(v, dtype=complex)
    return v / model.norm_h(v)


def perturb(model: Model, omega: float, phi, direction, amplitude: float,
            charge_preserving: bool = False) -> np.ndarray:
    """``phi + amplitude * direction`` with an H-normalised direction.

    With ``charge_preserving`` the state is moved back to the charge of
    ``phi`` along ``phi`` itself, which is the test curve of the
    instability argument.
    """
    d = _unit(model, direction)
    phi = np.asarray(phi, dtype=complex)
    if charge_preserving:
        return test_curve(model, omega, phi, d, amplitude, "negative")
    return phi + amplitude * d


def random_direction(model: Model, seed: int = 0, length: float = 0.5,
                     envelope: bool = True) -> np.ndarray:
    """Smooth complex noise, H-normalised.

    White noise is Gaussian-filtered over ``length`` (in x units).  With
    ``envelope`` it is also localised by a Gaussian of width a sixth of the
    grid extent, so that it is negligible at a truncation boundary.
    """
    rng = np.random.default_rng(seed)
    x = np.asarray(model.grid.x, dtype=float)
    h = float(np.min(np.diff(x)))
    z = rng.standard_normal(model.shape) + 1j * rng.standard_normal(model.shape)
    z = ndimage.gaussian_filter1d(z.real, length / h, axis=-1, mode="constant") \
        + 1j * ndimage.gaussian_filter1d(z.imag, length / h, axis=-1, mode="constant")
    if envelope:
        z = z * np.exp(-(x / (np.abs(x).max() / 6.0)) ** 2)
    return _unit(model, z)


def delta_direction(kind: str, p: float, gamma: float, omega: float, n_points: int = 2001,
                    sector: str = "even", seed: int = 0, lyapunov: bool = True):
    """Bound state and a named perturbation direction for the delta model.

    Returns ``(model, phi, direction, psi)`` where ``psi`` is the direction
    fed to the Lyapunov diagnostics (the charge-orthogonal minimiser in the
    even sector, the odd eigenfunction on the full line), or ``None`` when
    ``lyapunov`` is false and the direction does not need it.
    """
    from .delta import default_grid, profile, profile_domega
    from .spectral import charge_orthogonal_minimizer, check_B2

    if kind not in DIRECTIONS:
        raise ValueError(f"unknown direction {kind!r}; expected one of {DIRECTIONS}")
    if sector not in ("even", "full"):
        raise DomainError("sector must be 'even' or 'full'")
    grid = default_grid(omega, n_points)
    prof = profile(p, gamma, omega, grid)
    dphi = profile_domega(p, gamma, omega, grid)
    if sector == "even":
        prof = prof.sector("even")
        dphi = fold(dphi, "even")
    model, phi = prof.model, prof.field.astype(complex)
    psi = None
    if lyapunov or kind in ("psi", "chi1"):
        if sector == "even":
            psi = charge_orthogonal_minimizer(model, omega, phi).psi
        else:
            psi = check_B2(model, omega, phi, "b").witness
            if psi is None:
                raise DomainError("no odd negative direction at this point")
        psi = _unit(model, psi)
    if kind == "psi":
        d = psi
    elif kind == "chi1":
        if sector != "full":
            raise DomainError("chi1 is odd and needs the full-line grid")
        d = psi
    elif kind == "phi-prime":
        d = _unit(model, dphi)
    else:
        d = random_direction(model, seed)
    return model, phi, d, psi


def stability_scenario(n_points: int = 2001, amplitude: float = 1e-3) -> Scenario:
    """Even sector, ``p = 2``, ``gamma = 1``, ``omega = -2``: positive slope,
    perturbed along ``phi'``."""
    p, gamma, omega = 2.0, 1.0, -2.0
    model, phi, d, psi = delta_direction("phi-prime", p, gamma, omega, n_points, "even")
    u0 = perturb(model, omega, phi, d, amplitude)
    return Scenario("stability", model, omega, phi, psi, u0, amplitude,
                    {"p": p, "gamma": gamma, "n_points": n_points})


def instability_scenario(name: str, n_points: int = 2001, amplitude: float = 1e-3) -> Scenario:
    """Initial data on the test curve through ``phi`` along the direction
    singled out by the corresponding condition pipeline.

    ``negative-slope``: ``p = 6``, ``omega = -2``, even sector,
    charge-orthogonal minimiser.  ``odd-mode``: ``p = 2``, ``omega = -2``,
    full line, odd eigenfunction of ``L_omega``.  ``critical-slope``:
    ``p = 4`` at the zero of ``d''``, even sector, ``phi'``.  All use
    ``gamma = 1``.  Only the direction is computed here; the full condition
    checks live in the pipelines.
    """
    from .dcurve import find_omega_star

    gamma = 1.0
    if name == "negative-slope":
        p, omega, kind, sector = 6.0, -2.0, "psi", "even"
    elif name == "odd-mode":
        p, omega, kind, sector = 2.0, -2.0, "chi1", "full"
    elif name == "critical-slope":
        p, kind, sector = 4.0, "phi-prime", "even"
        omega = find_omega_star(p, gamma, n_points=n_points).omega_star
    else:
        raise ValueError(f"unknown setting {name!r}; expected one of {INSTABILITY_SETTINGS}")
    model, phi, d, psi = delta_direction(kind, p, gamma, omega, n_points, sector,
                                         lyapunov=(kind != "phi-prime"))
    if psi is None:
        psi = d
    u0 = perturb(model, omega, phi, d, amplitude, charge_preserving=True)
    return Scenario(name, model, omega, phi, psi, u0, amplitude,
                    {"p": p, "gamma": gamma, "n_points": n_points})


def semitrivial_scenario(gamma: float, omega: float = -1.0, n_points: int = 1000,
                         amplitude: float = 1e-3, dimension: int = 1) -> Scenario:
    """``(0, varphi)`` with ``amplitude * varphi`` added to the first component."""
    from .system import SystemNLS, ground_state, semitrivial_state

    g = ground_state(omega, dimension, n_points=n_points)
    model = SystemNLS(gamma, g.grid)
    phi = semitrivial_state(g)
    d = np.zeros_like(phi)
    d[0] = g.varphi
    u0 = perturb(model, omega, phi, d, amplitude)
    return Scenario(f"semitrivial-{gamma:g}", model, omega, phi, None, u0, amplitude,
                    {"gamma": gamma, "n_points": n_points, "dimension": dimension})
