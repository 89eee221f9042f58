"""
Conservative time stepping of ``u_t = J E'(u)`` and trajectory diagnostics.

The scheme is Crank-Nicolson: the kinetic part is treated by the trapezoid
rule and the nonlinear part by the model's discrete gradient between the
old and new states, resolved by fixed-point iteration.  For the scalar
gauge models the discrete gradient is a difference quotient in ``|u|^2``,
which conserves both the discrete charge and the discrete energy; the
two-component model uses the midpoint gradient, which conserves the charge.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.sparse as sp
from scipy.linalg import lapack
from scipy.sparse.linalg import splu

from .core import Model
from .lyapunov import AlignmentSingularError, Lyapunov, tube_distance


class IntegratorError(RuntimeError):
    """Fixed-point iteration failed to converge."""

    def __init__(self, step: int, change: float):
        super().__init__(f"fixed point did not converge at step {step} (change {change:.3g})")
        self.step = step


class BlowUpError(RuntimeError):
    """Non-finite values appeared in the solution."""


class BoundaryError(RuntimeError):
    """The solution grew at the truncation boundary beyond the allowed level."""


class InsufficientDataError(ValueError):
    """Too few in-tube samples for the requested check."""


@dataclass(frozen=True)
class IntegratorConfig:
    dt: float = 1e-3
    t_end: float = 20.0
    scheme: str = "crank-nicolson-fixed-point"
    fp_tol: float = 1e-12
    fp_max_iter: int = 50
    diag_stride: int = 10
    tube_radius: Optional[float] = None
    post_exit: Optional[float] = None
    conservation_tol: float = 1e-6
    boundary_tol: Optional[float] = 1e-4

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if not self.fp_tol < 1e-8:
            raise ValueError("fp_tol must be below 1e-8")
        if self.diag_stride < 1:
            raise ValueError("diag_stride must be at least 1")
        if self.scheme != "crank-nicolson-fixed-point":
            raise ValueError(f"unsupported scheme {self.scheme!r}")


@dataclass
class TrajectoryDiagnostics:
    times: np.ndarray
    E_series: np.ndarray
    Q_series: np.ndarray
    A_series: np.ndarray
    Lambda_series: np.ndarray
    P_series: np.ndarray
    tube_dist_series: np.ndarray
    identity_residual_series: np.ndarray
    exit_time: Optional[float]
    tube_radius: float
    energy_drift: float
    charge_drift: float
    boundary_max: float
    boundary_growth: float
    valid: bool
    meta: dict = field(default_factory=dict)

    def summary(self) -> dict:
        return {
            "t_final": float(self.times[-1]),
            "exit_time": None if self.exit_time is None else float(self.exit_time),
            "tube_radius": float(self.tube_radius),
            "max_tube_distance": float(np.max(self.tube_dist_series)),
            "energy_drift": float(self.energy_drift),
            "charge_drift": float(self.charge_drift),
            "boundary_max": float(self.boundary_max),
            "boundary_growth": float(self.boundary_growth),
            "valid": bool(self.valid),
            **self.meta,
        }

    def rows(self) -> list:
        keys = ("times", "E_series", "Q_series", "A_series", "Lambda_series", "P_series",
                "tube_dist_series", "identity_residual_series")
        cols = [getattr(self, k) for k in keys]
        return [dict(zip(keys, map(float, vals))) for vals in zip(*cols)]


class _Solver:
    """Factorised ``W + i a K`` for one component; LAPACK tridiagonal when possible."""

    def __init__(self, w: np.ndarray, K: sp.spmatrix, a: complex):
        A = sp.coo_matrix((sp.diags(w) + a * K).astype(complex))
        if A.nnz == 0 or np.abs(A.col - A.row).max() <= 1:
            self._lu = lapack.zgttrf(A.diagonal(-1), A.diagonal(0), A.diagonal(1))
            if self._lu[-1] != 0:
                raise np.linalg.LinAlgError("singular step matrix")
            self._lu = self._lu[:-1]
            self._splu = None
        else:
            self._splu = splu(A.tocsc())

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        if self._splu is not None:
            return self._splu.solve(rhs)
        x, info = lapack.zgttrs(*self._lu, rhs)
        return x


class _Stepper:
    """One Crank-Nicolson step with fixed-point resolution of the nonlinearity."""

    def __init__(self, model: Model, cfg: IntegratorConfig):
        self.model = model
        self.cfg = cfg
        w = model.mass
        K = model.kinetic_form
        self.jw = np.atleast_1d(np.asarray(model.j_weights, dtype=float))
        dt = cfg.dt
        self.lhs = [_Solver(w, K, -0.5j * c * dt) for c in self.jw]
        self.rhs_ops = [(sp.diags(w) + 0.5j * c * dt * K).tocsr() for c in self.jw]
        self.w = w

    def step(self, u: np.ndarray, guess: np.ndarray, index: int) -> np.ndarray:
        m = self.model
        cfg = self.cfg
        uu = np.atleast_2d(u)
        base = [op @ comp for op, comp in zip(self.rhs_ops, uu)]
        new = np.array(guess, dtype=complex, copy=True)
        scale = max(np.max(np.abs(u)), 1e-300)
        tol = cfg.fp_tol * scale
        change = prev_change = np.inf
        for _ in range(cfg.fp_max_iter):
            g = np.atleast_2d(m.nonlinear_dgrad(u, new))
            nxt = np.empty_like(np.atleast_2d(new))
            for k, c in enumerate(self.jw):
                rhs = base[k] + 1j * c * cfg.dt * self.w * g[k]
                nxt[k] = self.lhs[k].solve(rhs)
            nxt = nxt.reshape(new.shape)
            change = float(np.max(np.abs(nxt - new)))
            new = nxt
            if change <= tol:
                return new
            # stalled at the rounding floor: further sweeps only add noise
            if change < 1e3 * tol and change >= 0.5 * prev_change:
                return new
            prev_change = change
        if not np.all(np.isfinite(new)):
            raise BlowUpError(f"non-finite values at step {index}")
        raise IntegratorError(index, change / scale)


def evolve(model: Model, u0, cfg: IntegratorConfig, omega: Optional[float] = None,
           phi=None, psi=None) -> tuple:
    """Integrate from ``u0`` to ``cfg.t_end``.

    With ``phi`` the tube distance to its orbit is recorded; with ``omega``
    and ``psi`` as well, ``A``, ``Lambda`` and ``P`` are recorded while the
    state is inside the tube (NaN afterwards).  With ``cfg.post_exit`` the
    run stops that long after the first tube exit.
    """
    u = np.array(model.check(u0), dtype=complex)
    stepper = _Stepper(model, cfg)
    n_steps = int(round(cfg.t_end / cfg.dt))
    lyap = None
    radius = np.inf
    if phi is not None:
        phi = np.asarray(phi, dtype=complex)
        radius = cfg.tube_radius if cfg.tube_radius is not None else 0.05 * model.norm_x(phi)
        if omega is not None and psi is not None:
            lyap = Lyapunov(model, omega, phi, psi, radius)

    times, Es, Qs, As, Ls, Ps, Ds = [], [], [], [], [], [], []
    exit_time = None
    boundary = growth = 0.0
    # every grid has a Dirichlet far end just past its last node
    edge0 = np.abs(np.atleast_2d(u)[:, -1])

    def record(t: float, state: np.ndarray) -> None:
        nonlocal exit_time, boundary, growth
        times.append(t)
        Es.append(model.energy(state))
        Qs.append(model.charge(state))
        edge = np.abs(np.atleast_2d(state)[:, -1])
        boundary = max(boundary, float(np.max(edge)))
        growth = max(growth, float(np.max(edge - edge0)))
        if cfg.boundary_tol is not None and growth > cfg.boundary_tol:
            raise BoundaryError(f"boundary amplitude grew by {growth:.3g} at t={t:.6g}; "
                                "shorten t_end or enlarge the grid")
        a = lam = p = np.nan
        if phi is None:
            Ds.append(np.nan)
        else:
            d = tube_distance(model, state, phi)
            Ds.append(d)
            if d >= radius and exit_time is None:
                exit_time = t
            if lyap is not None and exit_time is None:
                try:
                    st = lyap.align(state, check_tube=False)
                    a, lam, p = st.a_value, st.lambda_value, st.p_value
                except AlignmentSingularError:
                    pass
        As.append(a)
        Ls.append(lam)
        Ps.append(p)

    record(0.0, u)
    prev = u.copy()
    stop_at = None
    for k in range(1, n_steps + 1):
        guess = 2 * u - prev if k > 1 else u
        new = stepper.step(u, guess, k)
        if not np.all(np.isfinite(new)):
            raise BlowUpError(f"non-finite values at step {k}")
        prev, u = u, new
        t = k * cfg.dt
        if k % cfg.diag_stride == 0 or k == n_steps:
            record(t, u)
            if exit_time is not None and cfg.post_exit is not None and stop_at is None:
                stop_at = exit_time + cfg.post_exit
            if stop_at is not None and t >= stop_at:
                break

    Es = np.array(Es)
    Qs = np.array(Qs)
    e_drift = float(np.max(np.abs(Es - Es[0])) / max(abs(Es[0]), 1e-300))
    q_drift = float(np.max(np.abs(Qs - Qs[0])) / max(abs(Qs[0]), 1e-300))
    times = np.array(times)
    As = np.array(As)
    Ps = np.array(Ps)
    resid = _identity_residual(times, As, Ps)
    diag = TrajectoryDiagnostics(
        times, Es, Qs, As, np.array(Ls), Ps, np.array(Ds), resid, exit_time,
        float(radius), e_drift, q_drift, boundary, growth,
        bool(e_drift < cfg.conservation_tol and q_drift < cfg.conservation_tol),
        {"dt": cfg.dt, "n_points": model.grid.n_points},
    )
    return u, diag


def _identity_residual(times, A, P) -> np.ndarray:
    """``|dA/dt + P|`` by centred differences at interior samples."""
    out = np.full(times.shape, np.nan)
    if times.size >= 3:
        dA = (A[2:] - A[:-2]) / (times[2:] - times[:-2])
        out[1:-1] = np.abs(dA + P[1:-1])
    return out


def lyapunov_identity_residual(diag: TrajectoryDiagnostics, min_samples: int = 10) -> float:
    """Largest ``|dA/dt + P|`` over in-tube samples, relative to ``max |P|``."""
    r = diag.identity_residual_series
    ok = np.isfinite(r)
    if np.sum(ok) < min_samples:
        raise InsufficientDataError(f"only {int(np.sum(ok))} in-tube samples")
    pmax = float(np.nanmax(np.abs(diag.P_series)))
    return float(np.max(r[ok]) / max(pmax, 1e-300))


def time_reversal_error(model: Model, u0, cfg: IntegratorConfig) -> float:
    """Relative H-distance after evolving forward and then backward."""
    fwd, _ = evolve(model, u0, cfg)
    # real forms make conjugation a time reversal: conj(u(-t)) is a solution
    back, _ = evolve(model, np.conj(fwd), cfg)
    back = np.conj(back)
    return model.norm_h(back - np.asarray(u0)) / model.norm_h(u0)
