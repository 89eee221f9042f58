"""
Eigenanalysis of linearised operators and checkers for the spectral
hypotheses of the instability theorems.

Every quadratic form is handled on the real-doubled space: a complex field
``w`` contributes ``Re(w)^T L_R Re(w) + Im(w)^T L_I Im(w)``.  Constraints
``(c, w)_H = 0`` become linear functionals ``W c`` on the real and imaginary
parts, and constrained minima are computed on an explicit orthonormal basis
of the constraint complement.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
from scipy.sparse.csgraph import reverse_cuthill_mckee

from .core import DomainError, Model, dual_norm, fold

TOL_POS = 1e-8
TOL_CONSTRAINT = 1e-8


class ConstraintError(ValueError):
    """A direction violates the orthogonality constraints it must satisfy."""


@dataclass(frozen=True)
class SpectrumReport:
    """Lowest eigenpairs of ``op v = lambda * mass v``.

    ``eigenvectors`` holds one mass-normalised vector per row.
    """

    eigenvalues: np.ndarray
    sector: str
    n_negative: int
    kernel_dim_est: int
    eigenvectors: np.ndarray
    tol_kernel: float

    def as_dict(self) -> dict:
        return {
            "sector": self.sector,
            "eigenvalues": [float(v) for v in self.eigenvalues],
            "n_negative": int(self.n_negative),
            "kernel_dim_est": int(self.kernel_dim_est),
            "tol_kernel": float(self.tol_kernel),
        }


@dataclass(frozen=True)
class ConditionReport:
    condition: str
    holds: bool
    witness: Optional[np.ndarray] = None
    scalars: dict = field(default_factory=dict)
    note: str = ""

    def as_dict(self) -> dict:
        return {
            "condition": self.condition,
            "holds": bool(self.holds),
            "scalars": {k: float(v) for k, v in self.scalars.items()},
            "note": self.note,
        }


# -- generic eigen-solvers ---------------------------------------------------

def _as_sparse(A) -> sp.csr_matrix:
    return A.tocsr() if sp.issparse(A) else sp.csr_matrix(np.asarray(A, dtype=float))


def _check_symmetric(A, name: str) -> None:
    diff = abs(A - A.T).max() if sp.issparse(A) else np.max(np.abs(A - A.T))
    scale = abs(A).max() if sp.issparse(A) else np.max(np.abs(A))
    if diff > 1e-12 * max(scale, 1e-300):
        raise ValueError(f"{name} is not symmetric (asymmetry {diff:.3g})")


def spectrum(op, mass, sector: str = "full", k: int = 6,
             tol_kernel: Optional[float] = None) -> SpectrumReport:
    """Lowest ``k`` eigenpairs of the pencil ``(op, mass)``.

    ``mass`` is either a positive vector (a diagonal mass) or a symmetric
    positive definite matrix.  With a diagonal mass the problem is reduced
    to a banded standard problem after a bandwidth-reducing permutation.
    ``tol_kernel`` defaults to ``1e-6`` times a spectral-radius estimate.
    """
    _check_symmetric(op, "operator")
    n = op.shape[0]
    k = min(k, n)
    if np.ndim(mass) == 1:
        w = np.asarray(mass, dtype=float)
        if np.any(w <= 0):
            raise ValueError("mass is not positive definite")
        d = 1.0 / np.sqrt(w)
        C = _as_sparse(sp.diags(d) @ _as_sparse(op) @ sp.diags(d))
        perm = reverse_cuthill_mckee(C, symmetric_mode=True)
        Cp = C[perm][:, perm].tocoo()
        bw = int(np.max(np.abs(Cp.row - Cp.col))) if Cp.nnz else 0
        radius = float(abs(C).sum(axis=1).max())
        if bw <= 16:
            band = np.zeros((bw + 1, n))
            for q in range(bw + 1):
                band[bw - q, q:] = Cp.tocsr().diagonal(q)
            vals, vecs = la.eig_banded(band, lower=False, select="i",
                                       select_range=(0, k - 1), check_finite=False)
        else:
            vals, vecs = la.eigh(Cp.toarray(), subset_by_index=[0, k - 1])
        y = np.empty_like(vecs)
        y[perm] = vecs
        vecs = (d[:, None] * y).T
    else:
        _check_symmetric(mass, "mass")
        Md = mass.toarray() if sp.issparse(mass) else np.asarray(mass, dtype=float)
        try:
            la.cholesky(Md)
        except la.LinAlgError as exc:
            raise ValueError("mass is not positive definite") from exc
        Od = op.toarray() if sp.issparse(op) else np.asarray(op, dtype=float)
        vals, vecs = la.eigh(Od, Md, subset_by_index=[0, k - 1])
        radius = float(np.max(np.abs(Od).sum(axis=1)) / np.min(la.eigvalsh(Md)))
        vecs = vecs.T
    if tol_kernel is None:
        tol_kernel = 1e-6 * radius
    n_neg = int(np.sum(vals < -tol_kernel))
    kern = int(np.sum(np.abs(vals) <= tol_kernel))
    return SpectrumReport(np.asarray(vals), sector, n_neg, kern, vecs, float(tol_kernel))


def constrained_pencil_min(A, B, functionals: Sequence[np.ndarray], k: int = 1):
    """Lowest ``k`` eigenpairs of ``(A, B)`` on ``{w : g.w = 0 for g in functionals}``.

    Dense: the complement basis comes from a full QR factorisation.
    """
    n = A.shape[0]
    Ad = A.toarray() if sp.issparse(A) else np.asarray(A, dtype=float)
    if np.ndim(B) == 1:
        Bd = np.diag(np.asarray(B, dtype=float))
    else:
        Bd = B.toarray() if sp.issparse(B) else np.asarray(B, dtype=float)
    if len(functionals):
        G = np.column_stack([np.asarray(g, dtype=float) for g in functionals])
        Q, R = la.qr(G, mode="full")
        rank = int(np.sum(np.abs(np.diag(R)) > 1e-12 * np.max(np.abs(np.diag(R)))))
        Z = Q[:, rank:]
    else:
        Z = np.eye(n)
    Ah = Z.T @ (Ad @ Z)
    Bh = Z.T @ (Bd @ Z)
    Ah = 0.5 * (Ah + Ah.T)
    Bh = 0.5 * (Bh + Bh.T)
    vals, vecs = la.eigh(Ah, Bh, subset_by_index=[0, min(k, Z.shape[1]) - 1])
    return vals, (Z @ vecs).T


def _split_constraints(model: Model, constraints):
    """Route each constraint to the real and/or imaginary block."""
    w = model.flat_mass()
    real_f, imag_f, mixed = [], [], False
    for c in constraints:
        c = np.asarray(c, dtype=complex).reshape(-1)
        cr, ci = c.real, c.imag
        size = np.max(np.abs(c)) if c.size else 0.0
        has_r = np.max(np.abs(cr)) > 1e-14 * size
        has_i = np.max(np.abs(ci)) > 1e-14 * size
        if has_r and has_i:
            mixed = True
        if has_r:
            real_f.append(w * cr)
        if has_i:
            imag_f.append(w * ci)
    return real_f, imag_f, mixed


def constrained_minimum(model: Model, omega: float, phi, constraints: Sequence,
                        norm: str = "X", k: int = 1):
    """Minimum of ``<S''(phi) w, w> / ||w||^2`` subject to ``(c, w)_H = 0``.

    ``norm`` is ``"X"`` or ``"H"``.  Returns ``(values, fields)`` with the
    ``k`` lowest values and minimising complex fields.
    """
    LR, LI = model.hessian_forms(omega, phi)
    B = model.flat_x_form() if norm == "X" else model.flat_mass()
    real_f, imag_f, mixed = _split_constraints(model, constraints)
    size = model.ncomp * model.grid.n_points
    shape = model.shape
    if mixed:
        A = sp.block_diag([LR, LI])
        BB = sp.block_diag([B, B]) if sp.issparse(B) else np.concatenate([B, B])
        fun = []
        w = model.flat_mass()
        for c in constraints:
            c = np.asarray(c, dtype=complex).reshape(-1)
            fun.append(np.concatenate([w * c.real, w * c.imag]))
        vals, vecs = constrained_pencil_min(A, BB, fun, k)
        fields = [(v[:size] + 1j * v[size:]).reshape(shape) for v in vecs]
        return np.asarray(vals), fields
    vr, er = constrained_pencil_min(LR, B, real_f, k)
    vi, ei = constrained_pencil_min(LI, B, imag_f, k)
    cand = [(v, e.reshape(shape).astype(complex)) for v, e in zip(vr, er)]
    cand += [(v, 1j * e.reshape(shape)) for v, e in zip(vi, ei)]
    cand.sort(key=lambda t: t[0])
    cand = cand[:k]
    return np.array([c[0] for c in cand]), [c[1] for c in cand]


# -- condition checkers ------------------------------------------------------

def _normalise(model: Model, psi) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    nrm = model.norm_h(psi)
    if nrm == 0:
        raise ConstraintError("zero direction")
    return psi / nrm


def _check_orthogonal(model: Model, phi, psi, x_too: bool = False) -> dict:
    scale = model.norm_h(phi)
    out = {
        "phi_psi_H": model.inner_h(phi, psi) / scale,
        "Jphi_psi_H": model.inner_h(model.apply_J(phi), psi) / scale,
    }
    if x_too:
        out["Jphi_psi_X"] = model.inner_x(model.apply_J(phi), psi) / model.norm_x(phi)
    bad = {k: v for k, v in out.items() if abs(v) > TOL_CONSTRAINT}
    if bad:
        raise ConstraintError(f"orthogonality violated: {bad}")
    return out


def check_A1(model: Model, omega: float, phi, tol: float = 1e-8) -> ConditionReport:
    """Critical point and ``R phi`` in the range of ``I``."""
    res = dual_norm(model, model.grad_S(omega, phi)) / model.norm_x(phi)
    r_phi = model.riesz_X(phi)
    ratio = model.norm_x(r_phi) / model.norm_x(phi)
    return ConditionReport(
        "A1", bool(res < tol and np.isfinite(ratio)), None,
        {"residual": res, "riesz_ratio": ratio},
    )


def check_A2a(model: Model, omega: float, phi, psi) -> ConditionReport:
    psi = _normalise(model, psi)
    orth = _check_orthogonal(model, phi, psi)
    value = model.hessian_pair(omega, phi, psi, psi)
    return ConditionReport("A2a", bool(value < -TOL_POS), psi, {"form_value": value, **orth})


def check_A2b(model: Model, omega: float, phi, psi, tol: float = 1e-6) -> ConditionReport:
    """``S'' psi = mu phi`` and ``nu = 3 mu - <S'''(psi, psi), psi> != 0``."""
    psi = _normalise(model, psi)
    orth = _check_orthogonal(model, phi, psi, x_too=True)
    s2psi = model.apply_hessian(omega, phi, psi)
    mu = model.inner_h(s2psi, phi) / model.inner_h(phi, phi)
    resid = model.norm_h(s2psi - mu * np.asarray(phi)) / (abs(mu) * model.norm_h(phi))
    third = model.third_form(phi, psi)
    nu = 3.0 * mu - third
    holds = bool(resid < tol and abs(nu) > 1e-8 * max(abs(mu), 1.0))
    return ConditionReport(
        "A2b", holds, psi,
        {"mu": mu, "residual": resid, "third_form": third, "nu": nu, **orth},
    )


def check_A3(model: Model, omega: float, phi, psi, extra: Sequence = ()) -> ConditionReport:
    """Rayleigh minimum of ``S''`` in the X-norm on ``{phi, J phi, psi}^perp``."""
    psi = _normalise(model, psi)
    cons = [phi, model.apply_J(phi), psi, *extra]
    vals, fields = constrained_minimum(model, omega, phi, cons, norm="X")
    k0 = float(vals[0])
    return ConditionReport("A3", bool(k0 > TOL_POS), fields[0], {"k0_estimate": k0})


def _parity(model: Model, v) -> Optional[str]:
    if model.grid.kind != "full":
        return None
    v = np.asarray(v)
    even = np.max(np.abs(v - v[::-1]))
    odd = np.max(np.abs(v + v[::-1]))
    size = np.max(np.abs(v))
    if even < 1e-6 * size:
        return "even"
    if odd < 1e-6 * size:
        return "odd"
    return "mixed"


def hessian_spectra(model: Model, omega: float, phi, k: int = 4):
    """Spectra of the real-part and imaginary-part forms."""
    LR, LI = model.hessian_forms(omega, phi)
    w = model.flat_mass()
    return spectrum(LR, w, "real", k), spectrum(LI, w, "imag", k)


def check_B2(model: Model, omega: float, phi, variant: str = "a") -> ConditionReport:
    """One (``a``) or two (``b``) negative directions, all else non-negative."""
    sr, si = hessian_spectra(model, omega, phi, k=4)
    tol = max(sr.tol_kernel, si.tol_kernel)
    allv = np.sort(np.concatenate([sr.eigenvalues, si.eigenvalues]))
    n_neg = int(np.sum(allv < -tol))
    scal = {"lambda0": float(allv[0]), "lambda1": float(allv[1]),
            "lambda2": float(allv[2]), "n_negative": n_neg}
    if variant == "a":
        holds = n_neg == 1 and allv[1] >= -tol
        return ConditionReport("B2a", bool(holds), sr.eigenvectors[0], scal)
    chi0, chi1 = sr.eigenvectors[0], sr.eigenvectors[1]
    par0, par1 = _parity(model, chi0), _parity(model, chi1)
    o01 = abs(float(np.sum(model.mass * chi0 * chi1)))
    o1p = abs(model.inner_h(chi1, phi)) / model.norm_h(phi)
    scal.update({"chi0_chi1_H": o01, "chi1_phi_H": o1p})
    holds = (n_neg == 2 and sr.n_negative == 2 and par0 == "even" and par1 == "odd"
             and o01 < 1e-8 and o1p < 1e-8)
    return ConditionReport("B2b", bool(holds), chi1.astype(complex), scal,
                           note=f"chi0 {par0}, chi1 {par1}")


def check_B1(model: Model, omega: float, phi, dphi, tol: float = 1e-5) -> ConditionReport:
    """Differentiable branch: ``S''(phi) phi' = phi`` holds for the computed ``phi'``."""
    r = model.apply_hessian(omega, phi, dphi) - np.asarray(phi)
    res = model.norm_h(r) / model.norm_h(phi)
    return ConditionReport("B1", bool(res < tol), np.asarray(dphi, dtype=complex),
                           {"residual": res})


def check_B3(model: Model, omega: float, phi, n_samples: int = 20, seed: int = 0,
             c1: float = 0.5) -> ConditionReport:
    """Coercivity ``c1 ||u||_X^2 <= <S'' u, u> + c2 ||u||_H^2``.

    ``c2`` is the bound obtained from the largest potential value; it is
    tested on random fields.
    """
    LR, LI = model.hessian_forms(omega, phi)
    K = sp.block_diag([model.kinetic_form] * model.ncomp)
    w = model.flat_mass()
    worst = 0.0
    for L in (LR, LI):
        # Gershgorin bound on the potential part of the form, per unit mass
        V = (L - K).tocsr()
        diag = V.diagonal()
        off = np.asarray(abs(V - sp.diags(diag)).sum(axis=1)).ravel()
        lo = float(np.min((diag - off) / w))
        worst = min(worst, lo - c1 * float(model.x_mass))
    c2 = max(0.0, -worst)
    rng = np.random.default_rng(seed)
    margin = np.inf
    for _ in range(n_samples):
        u = rng.standard_normal(model.shape) + 1j * rng.standard_normal(model.shape)
        lhs = c1 * model.norm_x(u) ** 2
        rhs = model.hessian_pair(omega, phi, u, u) + c2 * model.norm_h(u) ** 2
        margin = min(margin, (rhs - lhs) / max(lhs, 1e-300))
    return ConditionReport("B3", bool(margin >= -1e-10), None,
                           {"c1": c1, "c2": c2, "min_margin": margin})


@dataclass(frozen=True)
class ChargeOrthogonalMin:
    lam: float
    psi: np.ndarray
    mu: float
    multiplier_residual: float
    jphi_psi_H: float
    lambda_nonnegative: bool


def charge_orthogonal_minimizer(model: Model, omega: float, phi) -> ChargeOrthogonalMin:
    """Minimise ``<S'' w, w>`` over ``||w||_H = 1``, ``(phi, w)_H = 0``.

    The Lagrange multiplier ``mu`` in ``S'' psi = lambda psi + mu phi`` is
    recovered by projection onto ``phi``.
    """
    vals, fields = constrained_minimum(model, omega, phi, [phi], norm="H")
    lam = float(vals[0])
    psi = _normalise(model, fields[0])
    flat = psi.reshape(-1)
    if np.real(flat[np.argmax(np.abs(flat))]) < 0:
        psi = -psi
    r = model.apply_hessian(omega, phi, psi) - lam * psi
    mu = model.inner_h(r, phi) / model.inner_h(phi, phi)
    resid = model.norm_h(r - mu * np.asarray(phi)) / max(model.norm_h(r), 1e-300)
    jp = model.inner_h(model.apply_J(phi), psi) / model.norm_h(phi)
    return ChargeOrthogonalMin(lam, psi, float(mu), float(resid), float(jp), bool(lam >= 0))


# -- delta model helpers and slope pipelines -------------------------------

def delta_sector_operator(p: float, gamma: float, omega: float, phi_full, grid,
                          parity: str, which: str = "L"):
    """``L_omega`` or ``M_omega`` restricted to the even or odd sector."""
    from .delta import DeltaNLS

    g = grid.sector(parity)
    half = fold(np.real(phi_full), "even")
    pot = half if parity == "even" else half[1:]
    model = DeltaNLS(p, gamma, g)
    op = model.operator_L(omega, pot) if which == "L" else model.operator_M(omega, pot)
    return model, op


def delta_sector_spectra(p: float, gamma: float, omega: float, n_points: int = 2001,
                         k: int = 4) -> dict:
    """Spectra of ``L_omega`` on both sectors and ``M_omega`` on the even one."""
    from .delta import default_grid, profile

    grid = default_grid(omega, n_points)
    prof = profile(p, gamma, omega, grid)
    out = {}
    for parity in ("even", "odd"):
        m, L = delta_sector_operator(p, gamma, omega, prof.field, grid, parity, "L")
        out[f"L_{parity}"] = spectrum(L, m.mass, parity, k)
    m, M = delta_sector_operator(p, gamma, omega, prof.field, grid, "even", "M")
    out["M_even"] = spectrum(M, m.mass, "even", k)
    out["profile"] = prof
    return out


@dataclass(frozen=True)
class PipelineResult:
    name: str
    reports: list
    model: Model
    omega: float
    phi: np.ndarray
    psi: np.ndarray

    @property
    def all_pass(self) -> bool:
        return all(r.holds for r in self.reports)

    def as_dict(self) -> dict:
        return {
            "pipeline": self.name,
            "omega": float(self.omega),
            "all_pass": self.all_pass,
            "reports": [r.as_dict() for r in self.reports],
        }


def _slope_report(p, gamma, omega, n_points, sign: int) -> ConditionReport:
    from .dcurve import d2_identity, d_value

    d2 = d2_identity(p, gamma, omega, n_points=n_points)
    d = d_value(p, gamma, omega, n_points=n_points)
    ok = d2 * sign > 1e-6 * abs(d) if sign else abs(d2) < 1e-6 * abs(d)
    label = {1: "d2>0", -1: "d2<0", 0: "d2=0"}[sign]
    return ConditionReport(label, bool(ok), None, {"d2": d2, "d": d})


def negative_slope_pipeline(p: float = 6.0, gamma: float = 1.0, omega: float = -2.0,
                            n_points: int = 2001) -> PipelineResult:
    """Negative slope regime on the even sector, ``psi`` from the
    ``(phi)^perp``-constrained minimiser."""
    from .delta import default_grid, profile, profile_domega

    grid = default_grid(omega, n_points)
    prof = profile(p, gamma, omega, grid).sector("even")
    model, phi = prof.model, prof.field
    dphi = fold(profile_domega(p, gamma, omega, grid), "even")
    cmin = charge_orthogonal_minimizer(model, omega, phi)
    psi = cmin.psi
    reports = [
        _slope_report(p, gamma, omega, n_points, -1),
        check_A1(model, omega, phi),
        check_B1(model, omega, phi, dphi),
        check_B2(model, omega, phi, "a"),
        check_B3(model, omega, phi),
        ConditionReport(
            "charge_orthogonal_min",
            bool(cmin.lam < 0 and cmin.multiplier_residual < 1e-6), psi,
            {"lambda": cmin.lam, "mu": cmin.mu,
             "multiplier_residual": cmin.multiplier_residual, "Jphi_psi_H": cmin.jphi_psi_H},
        ),
        check_A2a(model, omega, phi, psi),
        check_A3(model, omega, phi, psi),
    ]
    return PipelineResult("negative-slope", reports, model, omega, phi, psi)


def odd_mode_pipeline(p: float = 2.0, gamma: float = 1.0, omega: float = -2.0,
                      n_points: int = 2001) -> PipelineResult:
    """Positive slope regime on the full line, ``psi`` the odd second
    eigenfunction of ``L_omega``."""
    from .delta import default_grid, profile, profile_domega

    grid = default_grid(omega, n_points)
    prof = profile(p, gamma, omega, grid)
    model, phi = prof.model, prof.field
    dphi = profile_domega(p, gamma, omega, grid)
    b2 = check_B2(model, omega, phi, "b")
    psi = np.asarray(b2.witness, dtype=complex)
    reports = [
        _slope_report(p, gamma, omega, n_points, 1),
        check_A1(model, omega, phi),
        check_B1(model, omega, phi, dphi),
        b2,
        check_B3(model, omega, phi),
        check_A2a(model, omega, phi, psi),
        check_A3(model, omega, phi, psi),
    ]
    return PipelineResult("odd-mode", reports, model, omega, phi, _normalise(model, psi))


def critical_slope_pipeline(p: float = 4.0, gamma: float = 1.0, omega: Optional[float] = None,
                            n_points: int = 2001) -> PipelineResult:
    """Degenerate slope on the even sector at the critical frequency, with
    ``psi = phi' / ||phi'||_H``."""
    from .dcurve import d_derivatives, find_omega_star
    from .delta import default_grid, profile, profile_domega

    if omega is None:
        omega = find_omega_star(p, gamma, n_points=n_points).omega_star
    grid = default_grid(omega, n_points)
    prof = profile(p, gamma, omega, grid).sector("even")
    model, phi = prof.model, prof.field
    dphi = fold(profile_domega(p, gamma, omega, grid), "even")
    psi = dphi / model.norm_h(dphi)
    row = d_derivatives(p, gamma, omega, n_points=n_points)
    a2b = check_A2b(model, omega, phi, psi)
    mu_expected = 1.0 / model.norm_h(dphi)
    nu_expected = -mu_expected ** 3 * row.d3_identity
    reports = [
        _slope_report(p, gamma, omega, n_points, 0),
        ConditionReport("d3<0", bool(row.d3 < 0), None, {"d3": row.d3}),
        check_A1(model, omega, phi),
        check_B1(model, omega, phi, dphi),
        check_B2(model, omega, phi, "a"),
        check_B3(model, omega, phi),
        a2b,
        ConditionReport(
            "nu_identity",
            bool(abs(a2b.scalars["nu"] - nu_expected) < 1e-4 * abs(nu_expected)
                 and abs(a2b.scalars["mu"] - mu_expected) < 1e-6 * mu_expected),
            None, {"nu": a2b.scalars["nu"], "nu_from_d3": nu_expected,
                   "mu_expected": mu_expected},
        ),
        check_A3(model, omega, phi, psi),
    ]
    return PipelineResult("critical-slope", reports, model, omega, phi, psi.astype(complex))
