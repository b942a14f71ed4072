"""Slab Green's functions as transverse mode sums.

For {0 < x3 < L} the Dirichlet and Neumann fundamental solutions of
-Laplacian - k^2 are

    G_D = sum_{m>=1} (i / 2L) sin(m pi x3/L) sin(m pi y3/L) H0(k_m |x'-y'|)
    G_N = (i / 4L) H0(k |x'-y'|) + sum_{m>=1} (i / 2L) cos cos H0(k_m |x'-y'|)

with k_m = (k^2 - m^2 pi^2 / L^2)^(1/2) on the branch Im k_m >= 0.
Volume potentials are evaluated as one 2D convolution per mode after a
discrete sine or cosine transform in x3.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import fft as sfft
from scipy import special
from scipy.signal import fftconvolve

from .fields import GridField

EULER_GAMMA = np.euler_gamma
# mean of log|x| over the unit square centred at the origin
LOG_MEAN_UNIT_SQUARE = np.pi / 4 - 1.5 - 0.5 * np.log(2.0)


def hankel_h01(z):
    """H0^(1)(z) = J0(z) + i Y0(z); z = 0 is rejected."""
    z = np.asarray(z, dtype=complex)
    if np.any(z == 0):
        raise ValueError("H0^(1) is singular at z = 0")
    return special.hankel1(0, z)


def hankel_h11(z):
    return special.hankel1(1, np.asarray(z, dtype=complex))


@dataclass(frozen=True)
class ModeSpec:
    """Mode data of the slab: wavenumber k, width L and truncation M."""

    k: float
    L: float
    M: int
    neumann_zero_mode: bool = True
    resonance_rtol: float = 1e-9

    def __post_init__(self):
        if self.k <= 0 or self.L <= 0 or self.M < 0:
            raise ValueError("need k > 0, L > 0, M >= 0")
        ratio = self.k * self.L / np.pi
        m = round(ratio)
        if m >= 1 and abs(ratio - m) <= self.resonance_rtol * ratio:
            raise ValueError(f"k = {self.k} is resonant with mode m = {m} (k = m pi / L)")

    def k_m(self, m) -> np.ndarray:
        """Branch with k_m > 0 for propagating and i|.|^(1/2) for evanescent modes."""
        m = np.asarray(m, dtype=float)
        d = self.k ** 2 - (m * np.pi / self.L) ** 2
        return np.where(d >= 0, np.sqrt(np.abs(d)) + 0j, 1j * np.sqrt(np.abs(d)))

    @property
    def modes(self) -> np.ndarray:
        return np.arange(1, self.M + 1)

    @property
    def propagating(self) -> np.ndarray:
        m = self.modes
        return m[self.k_m(m).imag == 0]

    def with_M(self, M: int) -> "ModeSpec":
        return ModeSpec(self.k, self.L, M, self.neumann_zero_mode, self.resonance_rtol)


def _sep(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    r = np.hypot(x[0] - y[0], x[1] - y[1])
    if np.any(r == 0):
        raise ValueError("transverse separation x' = y' is singular")
    return r, x[2], y[2]


def phi_dirichlet(x, y, spec: ModeSpec):
    r, x3, y3 = _sep(x, y)
    total = 0j
    for m in spec.modes:
        s = np.sin(m * np.pi * x3 / spec.L) * np.sin(m * np.pi * y3 / spec.L)
        total = total + 1j / (2 * spec.L) * s * hankel_h01(spec.k_m(m) * r)
    return total


def psi_neumann(x, y, spec: ModeSpec):
    r, x3, y3 = _sep(x, y)
    total = 1j / (4 * spec.L) * hankel_h01(spec.k * r) if spec.neumann_zero_mode else 0j
    for m in spec.modes:
        c = np.cos(m * np.pi * x3 / spec.L) * np.cos(m * np.pi * y3 / spec.L)
        total = total + 1j / (2 * spec.L) * c * hankel_h01(spec.k_m(m) * r)
    return total


def tail_bound(r, spec: ModeSpec) -> float:
    """Magnitude of the first omitted term at transverse separation r."""
    return float(np.max(np.abs(hankel_h01(spec.k_m(spec.M + 1) * np.asarray(r, float))))) / (2 * spec.L)


# ---------------------------------------------------------------------------
# x3 transforms on the vertex grid x3_j = j L / n, j = 0..n


def slab_axis(L: float, n: int) -> np.ndarray:
    return np.linspace(0.0, L, n + 1)


def sine_cosine_expand(values, parity: str, M: int | None = None):
    """Mode coefficients E_m along the last axis (vertex grid incl. both faces).

    sine: f = sum_{m>=1} E_m sin(m pi x3/L), returns E_1..E_M (axis 0).
    cosine: f = sum_{m>=0} E_m cos(m pi x3/L), returns E_0..E_M.
    """
    f = np.asarray(values)
    n = f.shape[-1] - 1
    if parity == "sine":
        M = n - 1 if M is None else M
        c = sfft.dst(f[..., 1:-1], type=1, axis=-1) / n
        c = np.moveaxis(c, -1, 0)
        return _pad_modes(c, M)
    if parity == "cosine":
        M = n if M is None else M
        c = sfft.dct(f, type=1, axis=-1) / n
        c[..., 0] /= 2
        c[..., -1] /= 2
        c = np.moveaxis(c, -1, 0)
        return _pad_modes(c, M + 1)
    raise ValueError("parity must be 'sine' or 'cosine'")


def _pad_modes(c, count):
    if count <= c.shape[0]:
        return c[:count]
    pad = np.zeros((count - c.shape[0],) + c.shape[1:], dtype=c.dtype)
    return np.concatenate([c, pad])


def sine_cosine_synthesize(coeffs, parity: str, n: int, L: float = 1.0, derivative: bool = False):
    """Evaluate a sine/cosine series on the vertex grid (or its x3-derivative)."""
    x3 = slab_axis(L, n)
    c = np.asarray(coeffs)
    if parity == "sine":
        m = np.arange(1, c.shape[0] + 1)
        basis = (m[:, None] * np.pi / L) * np.cos(np.outer(m, x3) * np.pi / L) if derivative \
            else np.sin(np.outer(m, x3) * np.pi / L)
    elif parity == "cosine":
        m = np.arange(0, c.shape[0])
        basis = -(m[:, None] * np.pi / L) * np.sin(np.outer(m, x3) * np.pi / L) if derivative \
            else np.cos(np.outer(m, x3) * np.pi / L)
    else:
        raise ValueError("parity must be 'sine' or 'cosine'")
    return np.tensordot(c, basis, axes=(0, 0))


def parseval_ratio(values, parity: str, L: float = 1.0) -> float:
    """(L/2 sum_{m>=1} |E_m|^2 [+ L |E_0|^2]) / int |f|^2 with trapezoid in x3."""
    f = np.asarray(values)
    n = f.shape[-1] - 1
    h = L / n
    w = np.full(n + 1, h)
    w[[0, -1]] = h / 2
    norm2 = np.sum(np.abs(f) ** 2 * w)
    c = sine_cosine_expand(f, parity)
    if parity == "sine":
        modal = L / 2 * np.sum(np.abs(c) ** 2)
    else:
        modal = L * np.sum(np.abs(c[0]) ** 2) + L / 2 * np.sum(np.abs(c[1:-1]) ** 2) + L * np.sum(np.abs(c[-1]) ** 2)
    return float(modal / norm2)


# ---------------------------------------------------------------------------
# transverse convolution with the 2D outgoing kernel (i/4) H0(k_m r)


def transverse_kernel(km: complex, h: float, size: tuple, sub_near: int = 4, sub_self: int = 8):
    """Cell-averaged (i/4) H0(km r) on offsets (-nx+1..nx-1) x (-ny+1..ny-1).

    Self cell: the logarithmic part is averaged analytically, the bounded
    remainder by a sub_self^2 midpoint rule. Neighbouring cells: sub_near^2
    midpoint rule. Other cells: single midpoint.
    """
    nx, ny = size
    ox = np.arange(-nx + 1, nx) * h
    oy = np.arange(-ny + 1, ny) * h
    X, Y = np.meshgrid(ox, oy, indexing="ij")
    R = np.hypot(X, Y)
    R[nx - 1, ny - 1] = 1.0
    ker = 0.25j * hankel_h01(km * R)
    # neighbours
    s = (np.arange(sub_near) + 0.5) / sub_near - 0.5
    sx, sy = np.meshgrid(s, s, indexing="ij")
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            if di == 0 and dj == 0:
                continue
            rr = np.hypot(di * h + sx * h, dj * h + sy * h)
            ker[nx - 1 + di, ny - 1 + dj] = 0.25j * np.mean(hankel_h01(km * rr))
    # self cell
    s = (np.arange(sub_self) + 0.5) / sub_self - 0.5
    sx, sy = np.meshgrid(s, s, indexing="ij")
    rr = np.hypot(sx, sy) * h
    smooth = np.mean(hankel_h01(km * rr) - 2j / np.pi * np.log(rr))
    ker[nx - 1, ny - 1] = 0.25j * (smooth + 2j / np.pi * (np.log(h) + LOG_MEAN_UNIT_SQUARE))
    return ker


def convolve_transverse(g2d, km: complex, h: float):
    """sum_y' K(x' - y') g(y') h^2 on the same transverse grid."""
    g2d = np.asarray(g2d)
    nx, ny = g2d.shape[-2:]
    ker = transverse_kernel(km, h, (nx, ny))
    ker = ker.reshape((1,) * (g2d.ndim - 2) + ker.shape)
    full = fftconvolve(g2d, ker, mode="full", axes=(-2, -1))
    return full[..., nx - 1:2 * nx - 1, ny - 1:2 * ny - 1] * h * h


@dataclass
class HelmholtzSolution:
    u: GridField
    coefficients: np.ndarray
    boundary_residual: float
    bc: str


def solve_helmholtz_slab(g: GridField, bc: str, spec: ModeSpec) -> HelmholtzSolution:
    """Volume potential u = int G(x, y) g(y) dy for G the slab kernel of ``bc``.

    The grid of ``g`` must be transversally cell-centred with equal spacing in
    x1, x2 and a vertex grid in x3 spanning exactly [0, L]. Values are
    evaluated on the same grid; the x3 quadrature is exact for the retained
    modes.
    """
    vals = np.asarray(g.values)
    n3 = vals.shape[-1] - 1
    if abs(g.origin[2]) > 1e-12 or abs(g.origin[2] + n3 * g.spacing[2] - spec.L) > 1e-9 * spec.L:
        raise ValueError("x3 samples must span the slab [0, L] with both faces included")
    if abs(g.spacing[0] - g.spacing[1]) > 1e-12 * g.spacing[0]:
        raise ValueError("transverse spacing must be equal in x1 and x2")
    h = g.spacing[0]
    if bc == "dirichlet":
        coeff = sine_cosine_expand(vals, "sine", spec.M)
        modes = spec.modes
        weights = np.ones(spec.M)
    elif bc == "neumann":
        coeff = sine_cosine_expand(vals, "cosine", spec.M)
        modes = np.arange(0, spec.M + 1)
        weights = np.ones(spec.M + 1)
        if not spec.neumann_zero_mode:
            weights[0] = 0.0
    else:
        raise ValueError("bc must be 'dirichlet' or 'neumann'")
    out_c = np.zeros_like(coeff, dtype=complex)
    for idx, m in enumerate(modes):
        if weights[idx] == 0 or not np.any(coeff[idx]):
            continue
        out_c[idx] = convolve_transverse(coeff[idx], complex(spec.k_m(m)), h)
    parity = "sine" if bc == "dirichlet" else "cosine"
    u = sine_cosine_synthesize(out_c, parity, n3, spec.L)
    if bc == "dirichlet":
        bres = float(max(np.max(np.abs(u[..., 0])), np.max(np.abs(u[..., -1]))))
    else:
        du = sine_cosine_synthesize(out_c, parity, n3, spec.L, derivative=True)
        bres = float(max(np.max(np.abs(du[..., 0])), np.max(np.abs(du[..., -1]))))
    scale = float(np.max(np.abs(u))) if np.any(u) else 1.0
    return HelmholtzSolution(g.with_values(u, bc=bc), out_c, bres / scale, bc)


# ---------------------------------------------------------------------------
# radiation condition


@dataclass
class RadiationReport:
    radii: list
    values: list
    slope: float
    decreasing: bool
    passed: bool


def check_radiation(u_mode, spec: ModeSpec, m: int, radii, n_angles: int = 64, dr: float = 1e-4):
    """r^(1/2) max_theta |(d/dr - i k_m) u_m| on circles of the given radii.

    ``u_mode`` is a callable on transverse points of shape (2, ...). Passes if
    the values decrease over the outer half of the radii and their log-log
    slope there is at most -1/2 (outgoing waves give -1, incoming ones 0).
    """
    radii = np.asarray(sorted(radii), dtype=float)
    if radii.size < 3:
        raise ValueError("need at least three radii")
    km = complex(spec.k_m(m))
    if km.imag != 0:
        raise ValueError(f"mode {m} is not a propagating retained mode")
    th = np.linspace(0, 2 * np.pi, n_angles, endpoint=False)
    vals = []
    for r in radii:
        pts = lambda rr: np.array([rr * np.cos(th), rr * np.sin(th)])
        du = (u_mode(pts(r + dr)) - u_mode(pts(r - dr))) / (2 * dr)
        vals.append(float(np.sqrt(r) * np.max(np.abs(du - 1j * km.real * u_mode(pts(r))))))
    outer = np.asarray(vals[len(vals) // 2:])
    rr = radii[len(vals) // 2:]
    decreasing = bool(np.all(np.diff(outer) < 0))
    slope = float(np.polyfit(np.log(rr), np.log(outer), 1)[0]) if outer.size >= 2 else 0.0
    return RadiationReport(list(radii), vals, slope, decreasing, decreasing and slope <= -0.5)
