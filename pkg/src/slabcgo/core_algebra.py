"""Block algebra of the augmented Maxwell system.

Material parameters, the principal symbol of the first-order operator, the
potentials of the original and rescaled systems, the Schrodinger potential
of the factorization, and a spectral certificate that the factorization
holds on a periodic cell.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .fields import (
    GridField,
    PeriodicCell,
    block_diag_scalars,
    cross_matrix,
    fd_gradient,
    matvec,
    spectral_gradient,
    spectral_laplacian,
    transpose,
)

BUMP_KINDS = ("gaussian", "poly")
# a Gaussian is treated as supported within this many radii
GAUSSIAN_SUPPORT_RADII = 4.5


@dataclass(frozen=True)
class Bump:
    """Radial bump with analytic first and second derivatives.

    ``gaussian`` is exp(-|x-c|^2/r^2); ``poly`` is (1-|x-c|^2/r^2)^5 inside the
    ball, a C^4 function with compact support.
    """

    kind: str
    center: tuple
    radius: float
    amplitude: complex

    def __post_init__(self):
        if self.kind not in BUMP_KINDS:
            raise ValueError(f"unknown bump kind {self.kind!r}; expected one of {BUMP_KINDS}")
        if self.radius <= 0:
            raise ValueError("bump radius must be positive")
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))

    @property
    def support_radius(self) -> float:
        return self.radius * (GAUSSIAN_SUPPORT_RADII if self.kind == "gaussian" else 1.0)

    def _offset(self, x):
        c = np.asarray(self.center).reshape((3,) + (1,) * (np.ndim(x) - 1))
        return np.asarray(x, dtype=float) - c

    def evaluate(self, x, order: int = 2):
        """Return (value, gradient, hessian) up to ``order`` at points x."""
        d = self._offset(x)
        r2 = np.sum(d ** 2, axis=0) / self.radius ** 2
        a = self.amplitude
        if self.kind == "gaussian":
            g = np.exp(-r2)
            val = a * g
            grad = a * (-2.0 / self.radius ** 2) * d * g
            if order < 2:
                return val, grad, None
            outer = d[:, None] * d[None, :]
            eye = np.eye(3).reshape((3, 3) + (1,) * (d.ndim - 1))
            hess = a * g * (4.0 / self.radius ** 4 * outer - 2.0 / self.radius ** 2 * eye)
            return val, grad, hess
        s = np.clip(1.0 - r2, 0.0, None)
        val = a * s ** 5
        grad = a * 5 * s ** 4 * (-2.0 / self.radius ** 2) * d
        if order < 2:
            return val, grad, None
        outer = d[:, None] * d[None, :]
        eye = np.eye(3).reshape((3, 3) + (1,) * (d.ndim - 1))
        hess = a * (20 * s ** 3 * 4.0 / self.radius ** 4 * outer - 10 * s ** 4 / self.radius ** 2 * eye)
        return val, grad, hess

    def reflected(self, plane_height: float) -> "Bump":
        c = self.center
        return Bump(self.kind, (c[0], c[1], 2 * plane_height - c[2]), self.radius, self.amplitude)

    def conjugated(self) -> "Bump":
        return Bump(self.kind, self.center, self.radius, np.conj(self.amplitude))


def _sum_bumps(background, bumps: Sequence[Bump], x, order=2):
    shape = np.shape(x)[1:]
    val = np.full(shape, background, dtype=complex)
    grad = np.zeros((3,) + shape, dtype=complex)
    hess = np.zeros((3, 3) + shape, dtype=complex)
    for b in bumps:
        v, g, h = b.evaluate(x, order)
        val = val + v
        grad = grad + g
        if order >= 2:
            hess = hess + h
    return val, grad, hess


@dataclass(frozen=True)
class MaterialProfile:
    """Permeability mu and complex permittivity gamma = eps + i sigma/omega.

    Both equal their backgrounds outside the support box. Derived fields:
    alpha = grad log gamma, beta = grad log mu, kappa = omega (mu gamma)^(1/2),
    and the background wavenumber k = omega (mu0 eps0)^(1/2).
    """

    omega: float = 1.0
    mu0: float = 1.0
    eps0: float = 1.0
    mu_bumps: tuple = ()
    gamma_bumps: tuple = ()
    validate: bool = True

    def __post_init__(self):
        if self.omega <= 0 or self.mu0 <= 0 or self.eps0 <= 0:
            raise ValueError("omega, mu0 and eps0 must be positive")
        object.__setattr__(self, "mu_bumps", tuple(self.mu_bumps))
        object.__setattr__(self, "gamma_bumps", tuple(self.gamma_bumps))
        if self.validate and (self.mu_bumps or self.gamma_bumps):
            self._check_branch()

    def _check_branch(self, n: int = 17):
        lo, hi = self.support
        axes = [np.linspace(a, b, n) for a, b in zip(lo, hi)]
        pts = np.array(np.meshgrid(*axes, indexing="ij"))
        mu, gamma = self.mu(pts), self.gamma(pts)
        if not (np.all(np.isfinite(mu)) and np.all(np.isfinite(gamma))):
            raise ValueError("non-finite parameter value in the support box")
        if np.any(mu.real <= 0) or np.any(gamma.real <= 0):
            raise ValueError("parameters must keep a positive real part "
                             "(principal square-root branch would be ambiguous)")

    # -- basic values ------------------------------------------------------
    @property
    def k(self) -> float:
        return self.omega * np.sqrt(self.mu0 * self.eps0)

    @property
    def is_constant(self) -> bool:
        return not self.mu_bumps and not self.gamma_bumps

    @property
    def support(self):
        """Axis-aligned box (lo, hi) outside of which mu = mu0, gamma = eps0."""
        bumps = self.mu_bumps + self.gamma_bumps
        if not bumps:
            return (np.zeros(3), np.zeros(3))
        lo = np.min([np.asarray(b.center) - b.support_radius for b in bumps], axis=0)
        hi = np.max([np.asarray(b.center) + b.support_radius for b in bumps], axis=0)
        return lo, hi

    def mu(self, x):
        return _sum_bumps(self.mu0, self.mu_bumps, x, order=0)[0]

    def gamma(self, x):
        return _sum_bumps(self.eps0, self.gamma_bumps, x, order=0)[0]

    def mu_jet(self, x, order=2):
        return _sum_bumps(self.mu0, self.mu_bumps, x, order)

    def gamma_jet(self, x, order=2):
        return _sum_bumps(self.eps0, self.gamma_bumps, x, order)

    def alpha(self, x):
        g, dg, _ = self.gamma_jet(x, 1)
        return dg / g

    def beta(self, x):
        m, dm, _ = self.mu_jet(x, 1)
        return dm / m

    def kappa(self, x):
        return self.omega * np.sqrt(self.mu(x) * self.gamma(x))

    def derived(self, x):
        """All pointwise quantities needed by the potentials at x."""
        m, dm, hm = self.mu_jet(x)
        g, dg, hg = self.gamma_jet(x)
        if not (np.all(np.isfinite(m)) and np.all(np.isfinite(g))):
            raise ValueError("non-finite parameter value")
        alpha = dg / g
        beta = dm / m
        # d_i alpha_j = H_ij / g - g_i g_j / g^2
        jac_alpha = hg / g - dg[:, None] * dg[None, :] / g ** 2
        jac_beta = hm / m - dm[:, None] * dm[None, :] / m ** 2
        kappa = self.omega * np.sqrt(m * g)
        grad_kappa = 0.5 * kappa * (alpha + beta)
        return dict(mu=m, gamma=g, alpha=alpha, beta=beta, jac_alpha=jac_alpha,
                    jac_beta=jac_beta, kappa=kappa, grad_kappa=grad_kappa)

    # -- transformations -----------------------------------------------------
    def conjugated(self) -> "MaterialProfile":
        """The profile (mu, conj gamma) used for the second CGO family."""
        return MaterialProfile(self.omega, self.mu0, self.eps0, self.mu_bumps,
                               tuple(b.conjugated() for b in self.gamma_bumps), self.validate)

    def with_bumps(self, mu_bumps=None, gamma_bumps=None) -> "MaterialProfile":
        return MaterialProfile(self.omega, self.mu0, self.eps0,
                               self.mu_bumps if mu_bumps is None else tuple(mu_bumps),
                               self.gamma_bumps if gamma_bumps is None else tuple(gamma_bumps),
                               self.validate)

    def check_nonresonant(self, slab_width: float, m_max: int = 1000, rtol: float = 1e-9) -> None:
        """Reject k = m pi / L for any integer m."""
        ratio = self.k * slab_width / np.pi
        if ratio > 0 and abs(ratio - round(ratio)) < rtol * max(1.0, ratio) and round(ratio) <= m_max:
            raise ValueError(f"k = {self.k} is a slab resonance (m = {round(ratio)})")


def profile_from_config(cfg: dict) -> MaterialProfile:
    """Build a profile from flat key/value pairs.

    Keys: omega, mu0, eps0, and for each parameter p in {mu, gamma} optional
    ``p_bump`` (gaussian|poly|none), ``p_center`` ("x,y,z"), ``p_radius`` and
    ``p_amplitude`` (complex literal allowed). ``p_bumps`` may hold several
    bumps separated by ';' as "kind:cx,cy,cz:radius:amplitude".
    """
    def num(key, default):
        return float(cfg.get(key, default))

    def parse_bumps(prefix):
        out = []
        kind = str(cfg.get(f"{prefix}_bump", "none")).strip().lower()
        if kind not in ("", "none"):
            center = tuple(float(v) for v in str(cfg.get(f"{prefix}_center", "0,0,0")).split(","))
            out.append(Bump(kind, center, float(cfg.get(f"{prefix}_radius", 1.0)),
                            complex(str(cfg.get(f"{prefix}_amplitude", "0")).replace(" ", ""))))
        for spec in filter(None, (s.strip() for s in str(cfg.get(f"{prefix}_bumps", "")).split(";"))):
            kind, center, radius, amp = spec.split(":")
            out.append(Bump(kind.strip(), tuple(float(v) for v in center.split(",")), float(radius),
                            complex(amp.replace(" ", ""))))
        return tuple(out)

    return MaterialProfile(num("omega", 1.0), num("mu0", 1.0), num("eps0", 1.0),
                           parse_bumps("mu"), parse_bumps("gamma"))


# ---------------------------------------------------------------------------
# symbols and potentials


def symbol_matrix(zeta) -> np.ndarray:
    """The 8x8 matrix P(zeta); zeta may carry trailing grid axes."""
    z = np.asarray(zeta, dtype=complex)
    shape = z.shape[1:]
    p = np.zeros((8, 8) + shape, dtype=complex)
    zx = cross_matrix(z)
    p[0, 5:8] = z
    p[1:4, 4] = z
    p[1:4, 5:8] = -zx
    p[4, 1:4] = z
    p[5:8, 0] = z
    p[5:8, 1:4] = zx
    return p


def symbol_P(zeta, x) -> np.ndarray:
    """P(zeta) x = (zeta.e, zeta psi - zeta^e, zeta.h, zeta phi + zeta^h).

    With this sign, P(i grad)(exp(i zeta.x) c) = -exp(i zeta.x) P(zeta) c.
    """
    z = np.asarray(zeta, dtype=complex)
    u = np.asarray(x, dtype=complex)
    extra = u.ndim - 1
    z = z.reshape((3,) + (1,) * max(0, extra - (z.ndim - 1)) + z.shape[1:]) if z.ndim == 1 else z
    phi, h, psi, e = u[0], u[1:4], u[4], u[5:8]
    out = np.empty(np.broadcast_shapes(u.shape, (8,) + z.shape[1:]), dtype=complex)
    out[0] = np.sum(z * e, axis=0)
    out[1:4] = z * psi - np.cross(z, e, axis=0)
    out[4] = np.sum(z * h, axis=0)
    out[5:8] = z * phi + np.cross(z, h, axis=0)
    return out


def assemble_A(alpha, beta) -> np.ndarray:
    """The first-order-coefficient part A(alpha, beta) of V."""
    alpha = np.asarray(alpha, dtype=complex)
    beta = np.asarray(beta, dtype=complex)
    shape = np.broadcast_shapes(alpha.shape[1:], beta.shape[1:])
    a = np.zeros((8, 8) + shape, dtype=complex)
    a[0, 5:8] = alpha
    a[1:4, 4] = alpha
    a[4, 1:4] = beta
    a[5:8, 0] = beta
    return a


def assemble_V(mat: MaterialProfile, x) -> np.ndarray:
    """V = omega diag(mu, gamma) - i A(alpha, beta) at points x."""
    d = mat.derived(np.asarray(x, dtype=float))
    return mat.omega * block_diag_scalars(d["mu"], d["gamma"]) - 1j * assemble_A(d["alpha"], d["beta"])


def _w_from_derived(d) -> np.ndarray:
    kappa, alpha, beta = d["kappa"], d["alpha"], d["beta"]
    m = np.zeros((8, 8) + np.shape(kappa), dtype=complex)
    for i in range(8):
        m[i, i] = 2j * kappa
    m[0, 5:8] = alpha
    m[1:4, 4] = alpha
    m[1:4, 5:8] = cross_matrix(alpha)
    m[4, 1:4] = beta
    m[5:8, 0] = beta
    m[5:8, 1:4] = -cross_matrix(beta)
    return -0.5j * m


def assemble_W(mat: MaterialProfile, x) -> np.ndarray:
    """Potential of the rescaled system; its diagonal is kappa."""
    return _w_from_derived(mat.derived(np.asarray(x, dtype=float)))


def _qtilde_from_derived(d) -> np.ndarray:
    alpha, beta, ja, jb = d["alpha"], d["beta"], d["jac_alpha"], d["jac_beta"]
    kappa, gk = d["kappa"], d["grad_kappa"]
    shape = np.shape(kappa)
    eye = np.eye(3).reshape((3, 3) + (1,) * len(shape))
    div_a = np.einsum("ii...->...", ja)
    div_b = np.einsum("ii...->...", jb)
    q = np.zeros((8, 8) + shape, dtype=complex)
    q[0, 0] = 0.5 * div_a
    q[1:4, 1:4] = 0.5 * (ja + transpose(ja) - div_a * eye)
    q[4, 4] = 0.5 * div_b
    q[5:8, 5:8] = 0.5 * (jb + transpose(jb) - div_b * eye)
    sa = kappa ** 2 - 0.25 * np.sum(alpha * alpha, axis=0)
    sb = kappa ** 2 - 0.25 * np.sum(beta * beta, axis=0)
    for i in range(4):
        q[i, i] -= sa
    for i in range(4, 8):
        q[i, i] -= sb
    # first-order coupling: -(-2i grad kappa) in the four off-diagonal blocks
    q[0, 5:8] += 2j * gk
    q[1:4, 4] += 2j * gk
    q[4, 1:4] += 2j * gk
    q[5:8, 0] += 2j * gk
    return q


def assemble_Qtilde(mat: MaterialProfile, x) -> np.ndarray:
    """Zeroth-order potential with (P - W)(P + W^T) = -Laplacian + Qtilde."""
    d = mat.derived(np.asarray(x, dtype=float))
    for key in ("jac_alpha", "jac_beta"):
        if not np.all(np.isfinite(d[key])):
            raise ValueError("non-finite second derivative")
    return _qtilde_from_derived(d)


def assemble_Q(mat: MaterialProfile, x) -> np.ndarray:
    """Q = k^2 + Qtilde, which vanishes outside the support."""
    q = assemble_Qtilde(mat, x)
    for i in range(8):
        q[i, i] += mat.k ** 2
    return q


def rescale(x, mat: MaterialProfile, pos, direction: str = "forward") -> np.ndarray:
    """Y = diag(mu^(1/2), gamma^(1/2)) X (forward) or its inverse."""
    pos = np.asarray(pos, dtype=float)
    mu, gamma = mat.mu(pos), mat.gamma(pos)
    if np.any(mu == 0) or np.any(gamma == 0):
        raise ValueError("zero parameter value")
    sm, sg = np.sqrt(mu + 0j), np.sqrt(gamma + 0j)
    if direction == "forward":
        fx, fy = sm, sg
    elif direction == "inverse":
        fx, fy = 1 / sm, 1 / sg
    else:
        raise ValueError("direction must be 'forward' or 'inverse'")
    out = np.array(x, dtype=complex, copy=True)
    out[0:4] *= fx
    out[4:8] *= fy
    return out


# ---------------------------------------------------------------------------
# grid realization of P(i grad)


def _p_from_gradient(grad: np.ndarray) -> np.ndarray:
    """Assemble P(i grad) f from the gradient array grad[axis, comp, ...]."""
    g = 1j * grad
    out = np.empty(grad.shape[1:], dtype=complex)
    div = lambda blk: g[0, blk[0]] + g[1, blk[1]] + g[2, blk[2]]
    curl = lambda b: np.array([g[1, b + 2] - g[2, b + 1], g[2, b] - g[0, b + 2], g[0, b + 1] - g[1, b]])
    out[0] = div((5, 6, 7))
    out[1:4] = g[:, 4] - curl(5)
    out[4] = div((1, 2, 3))
    out[5:8] = g[:, 0] + curl(1)
    return out


def grid_gradient(values: np.ndarray, gf: GridField, backend: str | None = None) -> np.ndarray:
    backend = backend or ("spectral" if gf.periodic else "fd")
    if backend == "spectral":
        return spectral_gradient(values, gf.spacing, gf.bloch, gf.origin)
    if backend == "fd":
        return fd_gradient(values, gf.spacing)
    raise ValueError(f"unknown backend {backend!r}")


def apply_P_grid(f: GridField, wavelength: float | None = None, backend: str | None = None) -> GridField:
    """Apply P(i grad) to an 8-component grid field.

    Spectral differentiation on periodic cells, second-order differences on
    bounded boxes; the backend used is recorded in the result's metadata.
    """
    if f.ncomp != 8:
        raise ValueError("apply_P_grid expects an 8-component field")
    if wavelength is not None and wavelength / max(f.spacing) < 4.0:
        raise ValueError(f"grid too coarse: {wavelength / max(f.spacing):.2f} points per wavelength (< 4)")
    backend = backend or ("spectral" if f.periodic else "fd")
    out = _p_from_gradient(grid_gradient(f.values, f, backend))
    return f.with_values(out, backend=backend)


# ---------------------------------------------------------------------------
# factorization certificate


@dataclass
class FactorizationReport:
    grid: list
    backend: str
    max_rel_residual: float
    per_block_residuals: dict
    per_function: list = field(default_factory=list)

    def to_json(self) -> str:
        return json.dumps(dict(grid=self.grid, backend=self.backend,
                               max_rel_residual=self.max_rel_residual,
                               per_block_residuals=self.per_block_residuals), indent=2)


def random_smooth_fields(cell: PeriodicCell, count: int, max_mode: int = 3, seed: int = 0) -> list:
    """Random trigonometric 8-fields with modes |n_i| <= max_mode."""
    rng = np.random.default_rng(seed)
    pts = cell.points()
    out = []
    ns = np.arange(-max_mode, max_mode + 1)
    modes = np.array(np.meshgrid(ns, ns, ns, indexing="ij")).reshape(3, -1).T
    for _ in range(count):
        u = np.zeros((8,) + cell.shape, dtype=complex)
        for n in modes:
            weight = np.exp(-0.5 * np.sum(n ** 2))
            c = weight * (rng.standard_normal(8) + 1j * rng.standard_normal(8))
            kvec = 2 * np.pi * n / np.asarray(cell.side)
            u += c[:, None, None, None] * np.exp(1j * np.einsum("i,i...->...", kvec, pts))[None]
        out.append(u)
    return out


def check_factorization(mat: MaterialProfile, cell: PeriodicCell, count: int = 3,
                        seed: int = 0, max_mode: int = 3) -> FactorizationReport:
    """Spectral residual of (P - W)(P + W^T) u - (-Laplacian + Qtilde) u."""
    lo, hi = mat.support
    if not mat.is_constant:
        clo, chi = cell.bounds
        if np.any(lo <= clo) or np.any(hi >= chi):
            raise ValueError("material support must lie strictly inside the periodic cell")
    pts = cell.points()
    d = mat.derived(pts)
    w = _w_from_derived(d)
    wt = transpose(w)
    qt = _qtilde_from_derived(d)
    gf = GridField(np.zeros((8,) + cell.shape), cell.origin, cell.spacing, periodic=True)

    def p_op(u):
        return _p_from_gradient(spectral_gradient(u, cell.spacing))

    blocks = {"phi": slice(0, 1), "h": slice(1, 4), "psi": slice(4, 5), "e": slice(5, 8)}
    per_block = {k: 0.0 for k in blocks}
    per_function = []
    worst = 0.0
    for u in random_smooth_fields(cell, count, max_mode, seed):
        t = p_op(u) + matvec(wt, u)
        lhs = p_op(t) - matvec(w, t)
        rhs = -spectral_laplacian(u, cell.spacing) + matvec(qt, u)
        r = lhs - rhs
        scale = np.sqrt(np.sum(np.abs(rhs) ** 2))
        rel = float(np.sqrt(np.sum(np.abs(r) ** 2)) / scale)
        per_function.append(rel)
        worst = max(worst, rel)
        for name, sl in blocks.items():
            per_block[name] = max(per_block[name], float(np.sqrt(np.sum(np.abs(r[sl]) ** 2)) / scale))
    del gf
    return FactorizationReport(list(cell.shape), "spectral", worst, per_block, per_function)
