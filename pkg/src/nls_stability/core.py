"""
Grids, quadrature and the abstract Hamiltonian model.

Every model here is a finite-difference discretisation of a functional
``E`` on a real Hilbert space ``X`` sitting inside ``H = L^2``.  Fields are
complex numpy arrays of shape ``(n_points,)`` (scalar models) or
``(2, n_points)`` (two-component system).  Dual objects (``E'(u)``,
``Q'(u)``, ``R u``) are always returned through their H-representative, so
``<f, v> = inner_h(f, v)`` for every dual element ``f`` produced here.

Discrete quadratic forms are assembled from node weights (mass) and edge
weights (stiffness).  Both the energy and every inner product use the same
weights, so discrete adjointness identities hold to machine precision.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Optional, Sequence

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp

GRID_KINDS = ("segment", "full", "radial", "half-even", "half-odd")

# surface area of the unit sphere in R^N for the radial weights
_SPHERE_AREA = {1: 2.0, 2: 2.0 * np.pi, 3: 4.0 * np.pi}


class DomainError(ValueError):
    """Parameter outside the admissible set of a model or operation."""


class GridMismatchError(ValueError):
    """A field does not live on the grid of the model it is used with."""


@dataclass(frozen=True)
class Grid:
    """Uniform 1D grid.

    Values outside ``[left, right]`` are taken to be zero (Dirichlet) unless
    the kind carries a symmetry condition at the left end:

    * ``segment``  -- interior nodes of a bounded interval.
    * ``full``     -- ``[-L, L]``, symmetric, node at 0 (``n_points`` odd).
    * ``radial``   -- cell-centred nodes ``r_j = (j + 1/2) h`` on ``(0, R)``,
      zero flux at the origin, weight ``|S^{N-1}| r^{N-1}``.
    * ``half-even`` / ``half-odd`` -- the even/odd sector of a ``full`` grid
      stored on ``x >= 0`` (``x > 0`` for odd); weights double the mirrored
      half so that integrals are over the whole line.
    """

    kind: str
    left: float
    right: float
    n_points: int
    dimension: int = 1

    def __post_init__(self):
        if self.kind not in GRID_KINDS:
            raise ValueError(f"unknown grid kind {self.kind!r}")
        if self.n_points < 16:
            raise ValueError("n_points must be >= 16")
        if not self.right > self.left:
            raise ValueError("right endpoint must exceed left endpoint")
        if self.kind == "full":
            if self.n_points % 2 == 0:
                raise ValueError("full-line grids need an odd number of points")
            if not np.isclose(self.left, -self.right, rtol=0, atol=1e-14 * self.right):
                raise ValueError("full-line grids must be symmetric about 0")
        if self.dimension not in (1, 2, 3):
            raise ValueError("dimension must be 1, 2 or 3")
        if self.dimension != 1 and self.kind != "radial":
            raise ValueError("only radial grids support dimension > 1")

    # -- constructors -----------------------------------------------------
    @classmethod
    def full_line(cls, half_width: float, n_points: int) -> "Grid":
        return cls("full", -float(half_width), float(half_width), int(n_points))

    @classmethod
    def segment(cls, a: float, b: float, n_points: int) -> "Grid":
        """Interior nodes of ``(a, b)``; ``h = (b - a) / (n_points + 1)``."""
        h = (b - a) / (n_points + 1)
        return cls("segment", a + h, b - h, int(n_points))

    @classmethod
    def radial(cls, radius: float, n_points: int, dimension: int = 1) -> "Grid":
        h = radius / n_points
        return cls("radial", 0.5 * h, radius - 0.5 * h, int(n_points), int(dimension))

    # -- geometry ---------------------------------------------------------
    @property
    def h(self) -> float:
        return (self.right - self.left) / (self.n_points - 1)

    @property
    def x(self) -> np.ndarray:
        return np.linspace(self.left, self.right, self.n_points)

    @property
    def origin_index(self) -> Optional[int]:
        """Index of the node at ``x = 0`` (None when 0 is not a node)."""
        if self.kind == "full":
            return self.n_points // 2
        if self.kind == "half-even":
            return 0
        return None

    @property
    def mass(self) -> np.ndarray:
        """Quadrature weights of ``(u, v)_H``."""
        h = self.h
        n = self.n_points
        if self.kind in ("segment", "full"):
            return np.full(n, h)
        if self.kind == "half-even":
            w = np.full(n, 2.0 * h)
            w[0] = h
            return w
        if self.kind == "half-odd":
            return np.full(n, 2.0 * h)
        r = self.x
        return _SPHERE_AREA[self.dimension] * h * r ** (self.dimension - 1)

    @property
    def stiffness(self) -> sp.csr_matrix:
        """Symmetric matrix of the form ``int |u'|^2`` (Dirichlet ghosts)."""
        h = self.h
        n = self.n_points
        if self.kind in ("segment", "full"):
            edge = np.full(n - 1, 1.0 / h)
            ghost_left = ghost_right = 1.0 / h
        elif self.kind == "half-even":
            edge = np.full(n - 1, 2.0 / h)
            ghost_left, ghost_right = 0.0, 2.0 / h
        elif self.kind == "half-odd":
            edge = np.full(n - 1, 2.0 / h)
            ghost_left = ghost_right = 2.0 / h
        else:
            area = _SPHERE_AREA[self.dimension]
            faces = h * np.arange(1, n + 1)  # faces r_{j+1/2}
            kap = area * faces ** (self.dimension - 1) / h
            edge = kap[:-1]
            ghost_left, ghost_right = 0.0, kap[-1]
        diag = np.zeros(n)
        diag[:-1] += edge
        diag[1:] += edge
        diag[0] += ghost_left
        diag[-1] += ghost_right
        return sp.diags([-edge, diag, -edge], [-1, 0, 1], format="csr")

    # -- symmetry sectors -------------------------------------------------
    def sector(self, parity: str) -> "Grid":
        """Half grid carrying the even or odd sector of a full-line grid."""
        if self.kind != "full":
            raise ValueError("sectors are defined for full-line grids only")
        m = self.n_points // 2
        h = self.h
        if parity == "even":
            return Grid("half-even", 0.0, m * h, m + 1)
        if parity == "odd":
            return Grid("half-odd", h, m * h, m)
        raise ValueError(f"parity must be 'even' or 'odd', got {parity!r}")

    def parent(self) -> "Grid":
        """Full-line grid a sector grid was cut from."""
        if self.kind == "half-even":
            m = self.n_points - 1
        elif self.kind == "half-odd":
            m = self.n_points
        else:
            raise ValueError("only sector grids have a parent")
        return Grid.full_line(m * self.h, 2 * m + 1)


def tridiag_solve(A, rhs) -> np.ndarray:
    """Solve ``A x = rhs`` for a sparse tridiagonal ``A`` (real or complex)."""
    A = sp.dia_matrix(A)
    n = A.shape[0]
    ab = np.zeros((3, n), dtype=np.result_type(A.dtype, np.asarray(rhs).dtype))
    ab[0, 1:] = A.diagonal(1)
    ab[1] = A.diagonal(0)
    ab[2, :-1] = A.diagonal(-1)
    return la.solve_banded((1, 1), ab, rhs, check_finite=False)


def dual_norm(model: "Model", f) -> float:
    """``||f||_{X*}`` of a dual element given by its H-representative."""
    f = model.check(f)
    total = 0.0
    for comp in np.atleast_2d(f):
        g = model.mass * comp
        total += float(g.real @ model.solve_x_form(g.real) + g.imag @ model.solve_x_form(g.imag))
    return float(np.sqrt(max(total, 0.0)))


def fold(u: np.ndarray, parity: str) -> np.ndarray:
    """Restrict a full-line field (last axis) to its even/odd half."""
    u = np.asarray(u)
    m = u.shape[-1] // 2
    if parity == "even":
        return 0.5 * (u[..., m:] + u[..., m::-1])
    return 0.5 * (u[..., m + 1:] - u[..., m - 1::-1])


def unfold(v: np.ndarray, parity: str) -> np.ndarray:
    """Inverse of :func:`fold`: mirror a half field onto the full line."""
    v = np.asarray(v)
    if parity == "even":
        return np.concatenate([v[..., :0:-1], v], axis=-1)
    zero = np.zeros(v.shape[:-1] + (1,), dtype=v.dtype)
    return np.concatenate([-v[..., ::-1], zero, v], axis=-1)


@dataclass(frozen=True)
class ModelSpec:
    """Model identity plus parameters, validated on construction."""

    model_kind: str
    p: float = 3.0
    gamma: float = 1.0
    omega: float = -1.0
    grid: Optional[Grid] = None

    def __post_init__(self):
        if self.model_kind == "delta-nls":
            if not self.p > 1:
                raise DomainError(f"delta-nls needs p > 1, got p={self.p}")
            if self.gamma < 0:
                raise DomainError("attractive potentials (gamma < 0) are not supported")
            if not self.omega < -self.gamma ** 2 / 4:
                raise DomainError(
                    f"omega={self.omega} outside Omega = (-inf, {-self.gamma ** 2 / 4})"
                )
        elif self.model_kind == "system-nls":
            if not 0 < self.gamma:
                raise DomainError("system-nls needs gamma > 0")
            if not self.omega < 0:
                raise DomainError("system-nls needs omega < 0")
            if self.grid is not None and self.grid.dimension > 3:
                raise DomainError("system-nls needs N <= 3")
        elif self.model_kind == "linear-interval":
            if self.grid is not None and self.grid.kind != "segment":
                raise DomainError("linear-interval lives on a segment grid")
        else:
            raise ValueError(f"unknown model kind {self.model_kind!r}")

    def build(self) -> "Model":
        """Instantiate the discrete model for this spec."""
        if self.model_kind == "delta-nls":
            from .delta import DeltaNLS

            return DeltaNLS(self.p, self.gamma, self.grid)
        if self.model_kind == "system-nls":
            from .system import SystemNLS

            return SystemNLS(self.gamma, self.grid)
        from .linear import LinearInterval

        return LinearInterval(self.grid)


class Model:
    """Base class for the discrete Hamiltonian models.

    Subclasses set ``grid``, ``j_weights`` (``J`` acts on component ``k`` as
    multiplication by ``i * j_weights[k]``), ``point_gamma`` (coefficient of
    ``|u(0)|^2`` in ``2E``), ``x_mass`` (whether ``(u, v)_X`` contains the
    ``L^2`` term) and implement the nonlinear part of the energy.
    """

    grid: Grid
    j_weights: Sequence[float] = (1.0,)
    point_gamma: float = 0.0
    x_mass: bool = True

    # -- shapes -----------------------------------------------------------
    @property
    def ncomp(self) -> int:
        return len(self.j_weights)

    @property
    def shape(self) -> tuple:
        n = self.grid.n_points
        return (n,) if self.ncomp == 1 else (self.ncomp, n)

    def check(self, u) -> np.ndarray:
        u = np.asarray(u)
        if u.shape != self.shape:
            raise GridMismatchError(
                f"field of shape {u.shape} does not match model grid {self.shape}"
            )
        return u

    def zeros(self) -> np.ndarray:
        return np.zeros(self.shape, dtype=complex)

    def _jw(self) -> np.ndarray:
        jw = np.asarray(self.j_weights, dtype=float)
        return jw[0] if self.ncomp == 1 else jw[:, None]

    # -- cached matrices --------------------------------------------------
    @property
    def mass(self) -> np.ndarray:
        return self.grid.mass

    @cached_property
    def kinetic_form(self) -> sp.csr_matrix:
        """Form of the quadratic energy part ``int |u'|^2 + gamma |u(0)|^2``."""
        K = self.grid.stiffness.tolil()
        i0 = self.grid.origin_index
        if self.point_gamma and i0 is not None:
            K[i0, i0] += self.point_gamma
        return K.tocsr()

    @cached_property
    def x_form(self) -> sp.csr_matrix:
        """Gram matrix of ``(., .)_X`` for one real component."""
        K = self.kinetic_form
        if self.x_mass:
            K = K + sp.diags(self.mass)
        return K.tocsr()

    def solve_x_form(self, rhs) -> np.ndarray:
        """Solve with the one-component X Gram matrix."""
        return tridiag_solve(self.x_form, rhs)

    # -- inner products ---------------------------------------------------
    def inner_h(self, u, v) -> float:
        u = self.check(u)
        v = self.check(v)
        return float(np.sum(self.mass * np.real(u * np.conj(v))))

    def inner_x(self, u, v) -> float:
        u = self.check(u)
        v = self.check(v)
        G = self.x_form
        total = 0.0
        for a, b in zip(np.atleast_2d(u), np.atleast_2d(v)):
            total += float(a.real @ (G @ b.real) + a.imag @ (G @ b.imag))
        return total

    def norm_h(self, u) -> float:
        return float(np.sqrt(max(self.inner_h(u, u), 0.0)))

    def norm_x(self, u) -> float:
        return float(np.sqrt(max(self.inner_x(u, u), 0.0)))

    # -- group action -----------------------------------------------------
    def apply_J(self, u) -> np.ndarray:
        return 1j * self._jw() * self.check(u)

    def apply_J_inv(self, u) -> np.ndarray:
        return -1j / self._jw() * self.check(u)

    def apply_T(self, s: float, u) -> np.ndarray:
        return np.exp(1j * s * self._jw()) * self.check(u)

    # -- functionals ------------------------------------------------------
    def _apply_form(self, G, u) -> np.ndarray:
        out = np.empty(u.shape, dtype=complex)
        if u.ndim == 1:
            out[:] = G @ u.real + 1j * (G @ u.imag)
        else:
            for k in range(u.shape[0]):
                out[k] = G @ u[k].real + 1j * (G @ u[k].imag)
        return out

    def kinetic_grad(self, u) -> np.ndarray:
        """H-representative of the quadratic energy part."""
        return self._apply_form(self.kinetic_form, u) / self.mass

    def nonlinear_energy(self, u) -> float:
        return 0.0

    def nonlinear_grad(self, u) -> np.ndarray:
        return np.zeros_like(u, dtype=complex)

    def nonlinear_dgrad(self, a, b) -> np.ndarray:
        """Discrete gradient ``G`` of the nonlinear energy between ``a`` and ``b``.

        The default is the midpoint gradient.  Scalar gauge models override
        it with a charge- and energy-exact difference quotient.
        """
        return self.nonlinear_grad(0.5 * (a + b))

    def energy(self, u) -> float:
        u = self.check(u)
        K = self.kinetic_form
        quad = 0.0
        for a in np.atleast_2d(u):
            quad += float(a.real @ (K @ a.real) + a.imag @ (K @ a.imag))
        return 0.5 * quad + self.nonlinear_energy(u)

    def charge(self, u) -> float:
        return 0.5 * self.inner_h(u, u)

    def action(self, omega: float, u) -> float:
        return self.energy(u) - omega * self.charge(u)

    def grad_E(self, u) -> np.ndarray:
        u = self.check(u)
        return self.kinetic_grad(u) + self.nonlinear_grad(u)

    def grad_S(self, omega: float, u) -> np.ndarray:
        u = self.check(u)
        return self.grad_E(u) - omega * u

    def riesz_X(self, u) -> np.ndarray:
        """H-representative of ``R u`` (the X-Riesz map)."""
        u = self.check(u)
        return self._apply_form(self.x_form, u) / self.mass

    def riesz_H(self, u) -> np.ndarray:
        """H-representative of ``I u``; the identity in this representation."""
        return np.array(self.check(u), dtype=complex, copy=True)

    # -- linearisation at a real bound state ------------------------------
    def hessian_forms(self, omega: float, phi) -> tuple:
        """Symmetric forms ``(L_R, L_I)`` with
        ``<S''(phi) u, u> = Re(u)^T L_R Re(u) + Im(u)^T L_I Im(u)``.

        Components are stacked, so for a two-component model each form is
        ``2n x 2n``.
        """
        raise NotImplementedError

    def apply_hessian(self, omega: float, phi, u) -> np.ndarray:
        """H-representative of ``S''(phi) u``."""
        u = self.check(u)
        LR, LI = self.hessian_forms(omega, phi)
        flat = u.reshape(-1)
        w = np.tile(self.mass, self.ncomp)
        out = (LR @ flat.real + 1j * (LI @ flat.imag)) / w
        return out.reshape(self.shape)

    def hessian_pair(self, omega: float, phi, u, v) -> float:
        """``<S''(phi) u, v>``."""
        return self.inner_h(self.apply_hessian(omega, phi, u), v)

    def flat_mass(self) -> np.ndarray:
        return np.tile(self.mass, self.ncomp)

    def flat_x_form(self) -> sp.csr_matrix:
        return sp.block_diag([self.x_form] * self.ncomp, format="csr")
