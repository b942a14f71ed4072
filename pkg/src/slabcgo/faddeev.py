"""Fourier-multiplier solver for CGO correctors on a twisted periodic cell.

The corrector psi of Z = exp(i zeta.x)(Z0 + psi) solves

    (-Laplacian - 2i zeta.grad) psi + Q (Z0 + psi) = 0,

with Q = k^2 + Qtilde compactly supported. On a cell whose fields are
exp(i delta.x) times periodic functions the operator on the left is diagonal
with symbol |kappa|^2 + 2 zeta.kappa on the shifted dual lattice, which
avoids the characteristic set for the half-spacing shift.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.sparse.linalg import LinearOperator, gmres

from .core_algebra import MaterialProfile, _p_from_gradient, _w_from_derived, assemble_Q, symbol_P
from .fields import GridField, PeriodicCell, matvec, spectral_gradient, transpose, _twist_factor


MAX_ITERATIONS = 200
JITTER_FACTORS = (1.0, 1.1, 0.9, 1.05, 0.95)

__all__ = ["PeriodicCell", "CorrectorResult", "conjugated_multiplier", "prepare_cell",
           "potential_on_cell", "solve_corrector", "limit_R_residual", "build_full_Y",
           "grid_norm"]


def grid_norm(values, cell: PeriodicCell) -> float:
    return float(np.sqrt(np.sum(np.abs(values) ** 2) * cell.cell_volume))


@dataclass
class Multiplier:
    values: np.ndarray
    min_denominator: float
    cell: PeriodicCell

    def apply(self, g: np.ndarray, twist: np.ndarray) -> np.ndarray:
        """m(D) g for g stored with the cell twist."""
        gh = np.fft.fftn(g * np.conj(twist), axes=(-3, -2, -1))
        return np.fft.ifftn(gh * self.values, axes=(-3, -2, -1)) * twist


def conjugated_multiplier(zeta, cell: PeriodicCell, tau: float | None = None,
                          threshold: float = 1e-8) -> Multiplier:
    """1 / (|kappa|^2 + 2 zeta.kappa) on the shifted dual lattice."""
    zeta = np.asarray(zeta, dtype=complex)
    tau = float(np.linalg.norm(zeta.imag)) if tau is None else tau
    kap = cell.dual_lattice()
    denom = np.sum(kap * kap, axis=0) + 2 * np.einsum("i,i...->...", zeta, kap)
    dmin = float(np.min(np.abs(denom)))
    if dmin < threshold * max(tau, 1.0):
        raise ValueError(f"dual lattice meets the characteristic set: min |denominator| = {dmin:.3e}; "
                         "choose a different offset or cell size")
    return Multiplier(1.0 / denom, dmin, cell)


def prepare_cell(zeta, cell: PeriodicCell, tau=None):
    """Return (cell, multiplier), jittering the cell size by up to 10% if needed."""
    last = None
    for f in JITTER_FACTORS:
        trial = cell if f == 1.0 else cell.jittered(f)
        try:
            return trial, conjugated_multiplier(zeta, trial, tau)
        except ValueError as err:
            last = err
    raise last


def potential_on_cell(mat: MaterialProfile, cell: PeriodicCell) -> np.ndarray:
    """Q = k^2 + Qtilde sampled on the cell, shape (8, 8, n, n, n)."""
    lo, hi = mat.support
    clo, chi = cell.bounds
    if not mat.is_constant and (np.any(lo <= clo) or np.any(hi >= chi)):
        raise ValueError("material support must lie strictly inside the periodic cell")
    q = assemble_Q(mat, cell.points())
    if mat.is_constant:
        q[:] = 0.0
    return q


def _as_matrix_field(q) -> np.ndarray:
    if isinstance(q, GridField):
        return q.values.reshape((8, 8) + q.shape)
    return np.asarray(q)


@dataclass
class CorrectorResult:
    psi: GridField
    z_minus1: GridField
    z_r: GridField
    iterations: int
    residual: float
    converged: bool
    min_denominator: float
    history: list = field(default_factory=list)

    @property
    def cell(self) -> PeriodicCell:
        return self.psi.meta["cell"]


def solve_corrector(q, zeta, z0, cell: PeriodicCell, tol: float = 1e-8,
                    method: str = "gmres", multiplier: Multiplier | None = None) -> CorrectorResult:
    """Solve (I + m(D) Q) psi = -m(D) Q Z0.

    ``method`` is ``gmres`` (restarted Krylov) or ``born`` (plain fixed-point
    iteration). Raises RuntimeError on non-convergence within the iteration cap.
    """
    qm = _as_matrix_field(q)
    z0 = np.asarray(z0, dtype=complex)
    mult = multiplier or conjugated_multiplier(zeta, cell)
    twist = _twist_factor(cell.shape, cell.spacing, cell.origin, cell.bloch)
    shape = (8,) + cell.shape
    size = int(np.prod(shape))

    def wrap(vals, **meta):
        return cell.grid_field(vals, cell=cell, **meta)

    qz0 = np.einsum("ij...,j->i...", qm, z0)
    rhs = -mult.apply(qz0, twist)
    rhs_norm = np.linalg.norm(rhs)
    zero = np.zeros(shape, dtype=complex)
    if rhs_norm == 0:
        return CorrectorResult(wrap(zero), wrap(zero), wrap(zero), 0, 0.0, True, mult.min_denominator)

    def op(v):
        u = v.reshape(shape)
        return (u + mult.apply(matvec(qm, u), twist)).ravel()

    history = []
    if method == "born":
        psi = rhs.copy()
        it = 0
        res = np.linalg.norm(op(psi.ravel()) - rhs.ravel()) / rhs_norm
        history.append(res)
        while res > tol and it < MAX_ITERATIONS:
            psi = rhs - mult.apply(matvec(qm, psi), twist)
            it += 1
            res = np.linalg.norm(op(psi.ravel()) - rhs.ravel()) / rhs_norm
            history.append(res)
            if not np.isfinite(res) or res > 1e6:
                break
    elif method == "gmres":
        a = LinearOperator((size, size), matvec=op, dtype=complex)
        sol, info = gmres(a, rhs.ravel(), rtol=tol, atol=0.0, restart=40, maxiter=MAX_ITERATIONS // 40,
                          callback=lambda r: history.append(float(r)), callback_type="pr_norm")
        psi = sol.reshape(shape)
        it = len(history)
        res = np.linalg.norm(op(sol) - rhs.ravel()) / rhs_norm
    else:
        raise ValueError(f"unknown method {method!r}")
    converged = bool(res <= tol * 10)
    if not converged:
        raise RuntimeError(f"corrector iteration did not converge: residual {res:.3e} after {it} "
                           f"iterations; tau may be too small for this potential (history {history[-5:]})")
    return CorrectorResult(wrap(psi), wrap(rhs), wrap(psi - rhs), it, float(res), converged,
                           mult.min_denominator, history)


def limit_R_residual(res: CorrectorResult, q, zeta_hat, z0_limit, tau: float):
    """Relative residual of 2i (zeta_hat.grad)(tau Z_{-1}) = Q M_hat.

    Returns (value, absolute_flag); the absolute residual is returned when
    Q M_hat vanishes.
    """
    cell = res.cell
    qm = _as_matrix_field(q)
    r_hat = tau * np.asarray(res.z_minus1.values)
    grad = spectral_gradient(r_hat, cell.spacing, cell.bloch, cell.origin)
    lhs = 2j * np.einsum("i,i...->...", np.asarray(zeta_hat, dtype=complex), grad)
    rhs = np.einsum("ij...,j->i...", qm, np.asarray(z0_limit, dtype=complex))
    num = grid_norm(lhs - rhs, cell)
    den = grid_norm(rhs, cell)
    if den == 0:
        return num, True
    return num / den, False


def build_full_Y(res: CorrectorResult, zeta, z0, mat: MaterialProfile, cell: PeriodicCell | None = None):
    """Phase-stripped Y = exp(-i zeta.x)(P(i grad) + W^T) Z on the cell.

    Returns (GridField of Y, relative residual of the stripped first-order
    equation (P(i grad) - P(zeta) - W) Y = 0). The residual field itself is
    kept in the ``residual_field`` entry of the GridField meta.
    """
    cell = cell or res.cell
    zeta = np.asarray(zeta, dtype=complex)
    z0 = np.asarray(z0, dtype=complex)
    d = mat.derived(cell.points())
    w = _w_from_derived(d)
    wt = transpose(w)
    psi = np.asarray(res.psi.values)
    zb = zeta.reshape(3, 1, 1, 1)
    k = mat.k

    def p_twisted(u):
        return _p_from_gradient(spectral_gradient(u, cell.spacing, cell.bloch, cell.origin))

    def p_compact(u):
        return _p_from_gradient(spectral_gradient(u, cell.spacing))

    z0f = np.broadcast_to(z0.reshape(8, 1, 1, 1), psi.shape)
    # Y split into a compactly supported, a constant and a twisted part
    compact = np.einsum("ij...,j->i...", wt, z0) - k * z0f
    const = -symbol_P(zeta, z0) + k * z0
    const_f = np.broadcast_to(const.reshape(8, 1, 1, 1), psi.shape)
    twisted = -symbol_P(zb, psi) + p_twisted(psi) + matvec(wt, psi)
    y = compact + const_f + twisted

    def stripped_first_order(part, p_op):
        return p_op(part) - symbol_P(zb, part) - matvec(w, part)

    r = (stripped_first_order(compact, p_compact)
         + (-symbol_P(zb, const_f) - matvec(w, const_f))
         + stripped_first_order(twisted, p_twisted))
    rel = grid_norm(r, cell) / grid_norm(y, cell)
    return cell.grid_field(y, cell=cell, stripped=True, residual=rel, residual_field=r), rel
