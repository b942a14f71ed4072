"""Block layout of 8-component fields and uniform-grid containers.

An 8-field is stored as an array whose leading axis has length 8 and is
partitioned as (scalar, 3-vector, scalar, 3-vector) = (phi, h, psi, e).
Pointwise 8x8 matrices carry two leading axes of length 8.  Positions carry
a leading axis of length 3, so a single point has shape (3,) and a grid of
points has shape (3, nx, ny, nz).
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np

PHI = slice(0, 1)
H = slice(1, 4)
PSI = slice(4, 5)
E = slice(5, 8)
SCALAR_SLOTS = (0, 4)


@dataclass(frozen=True)
class Field8:
    """A single 8-component complex value (phi, h, psi, e)."""

    phi: complex = 0.0
    h: tuple = (0.0, 0.0, 0.0)
    psi: complex = 0.0
    e: tuple = (0.0, 0.0, 0.0)

    def to_array(self) -> np.ndarray:
        return pack(self.phi, self.h, self.psi, self.e)

    @classmethod
    def from_array(cls, arr) -> "Field8":
        arr = np.asarray(arr, dtype=complex)
        if arr.shape != (8,):
            raise ValueError(f"expected shape (8,), got {arr.shape}")
        return cls(complex(arr[0]), tuple(arr[1:4]), complex(arr[4]), tuple(arr[5:8]))

    def __array__(self, dtype=None, copy=None):
        arr = self.to_array()
        return arr if dtype is None else arr.astype(dtype)

    @property
    def is_maxwell_candidate(self) -> bool:
        return self.phi == 0 and self.psi == 0


def pack(phi, h, psi, e) -> np.ndarray:
    """Stack the four blocks into one array with leading axis 8."""
    phi = np.asarray(phi, dtype=complex)
    psi = np.asarray(psi, dtype=complex)
    h = np.asarray(h, dtype=complex)
    e = np.asarray(e, dtype=complex)
    shape = np.broadcast_shapes(phi.shape, psi.shape, h.shape[1:], e.shape[1:])
    out = np.empty((8,) + shape, dtype=complex)
    out[0] = phi
    out[1:4] = h
    out[4] = psi
    out[5:8] = e
    return out


def unpack(u: np.ndarray):
    """Return the blocks (phi, h, psi, e) as views."""
    u = np.asarray(u)
    if u.shape[0] != 8:
        raise ValueError(f"leading axis must have length 8, got {u.shape[0]}")
    return u[0], u[1:4], u[4], u[5:8]


def is_maxwell_candidate(u, atol: float = 0.0) -> np.ndarray:
    """Per-sample test that both scalar blocks vanish."""
    u = np.asarray(u)
    return (np.abs(u[0]) <= atol) & (np.abs(u[4]) <= atol)


def block_diag_scalars(x, y) -> np.ndarray:
    """The pointwise matrix diag(x, y): x on blocks 1-2, y on blocks 3-4."""
    x = np.asarray(x, dtype=complex)
    y = np.asarray(y, dtype=complex)
    shape = np.broadcast_shapes(x.shape, y.shape)
    out = np.zeros((8, 8) + shape, dtype=complex)
    for i in range(4):
        out[i, i] = x
    for i in range(4, 8):
        out[i, i] = y
    return out


def diag_apply(x, y, u: np.ndarray) -> np.ndarray:
    """Apply diag(x, y) to an 8-field without forming the matrix."""
    out = np.array(u, dtype=complex, copy=True)
    out[0:4] *= x
    out[4:8] *= y
    return out


def matvec(m: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Pointwise matrix-vector product for (8,8,...) by (8,...)."""
    return np.einsum("ij...,j...->i...", m, u)


def transpose(m: np.ndarray) -> np.ndarray:
    return np.swapaxes(m, 0, 1)


def bilinear(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Pointwise u . conj(v) summed over the component axis."""
    return np.sum(u * np.conj(v), axis=0)


def cross_matrix(a: np.ndarray) -> np.ndarray:
    """Matrix of the map b -> a x b, with shape (3, 3, ...)."""
    a = np.asarray(a)
    z = np.zeros_like(a[0])
    return np.array([[z, -a[2], a[1]], [a[2], z, -a[0]], [-a[1], a[0], z]])


@dataclass(frozen=True)
class GridField:
    """Samples of a multi-component field on a uniform tensor grid.

    ``values`` has shape (ncomp, nx, ny, nz). Point (i, j, l) sits at
    ``origin + (i, j, l) * spacing``. For periodic cells ``bloch`` holds the
    twist wavevector: the stored field equals exp(i bloch.x) times a
    cell-periodic function.
    """

    values: np.ndarray
    origin: tuple
    spacing: tuple
    periodic: bool = False
    bloch: tuple = (0.0, 0.0, 0.0)
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        vals = np.asarray(self.values)
        if vals.ndim != 4:
            raise ValueError("values must have shape (ncomp, nx, ny, nz)")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "origin", tuple(float(v) for v in self.origin))
        object.__setattr__(self, "spacing", tuple(float(v) for v in self.spacing))
        object.__setattr__(self, "bloch", tuple(float(v) for v in self.bloch))

    @property
    def shape(self) -> tuple:
        return self.values.shape[1:]

    @property
    def ncomp(self) -> int:
        return self.values.shape[0]

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    def axes(self):
        return [o + h * np.arange(n) for o, h, n in zip(self.origin, self.spacing, self.shape)]

    def points(self) -> np.ndarray:
        return np.array(np.meshgrid(*self.axes(), indexing="ij"))

    def with_values(self, values, **meta) -> "GridField":
        merged = dict(self.meta)
        merged.update(meta)
        return replace(self, values=np.asarray(values), meta=merged)

    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.values) ** 2) * self.cell_volume))


def l2_norm(values: np.ndarray, cell_volume: float = 1.0) -> float:
    return float(np.sqrt(np.sum(np.abs(values) ** 2) * cell_volume))


_MAGIC = b"SCGF"


def dump_grid_field(gf: GridField, path) -> None:
    """Write a grid field as a flat little-endian binary file.

    Header: magic, three int32 dims, int32 component count, three float64
    spacings, three float64 origins. Body: interleaved complex doubles in
    C order with the component axis first.
    """
    nx, ny, nz = gf.shape
    header = _MAGIC + struct.pack("<4i6d", nx, ny, nz, gf.ncomp, *gf.spacing, *gf.origin)
    body = np.ascontiguousarray(gf.values, dtype="<c16").tobytes()
    Path(path).write_bytes(header + body)


def load_grid_field(path) -> GridField:
    raw = Path(path).read_bytes()
    if raw[:4] != _MAGIC:
        raise ValueError("not a grid field dump")
    nx, ny, nz, nc, *rest = struct.unpack("<4i6d", raw[4:4 + 64])
    spacing, origin = rest[:3], rest[3:]
    vals = np.frombuffer(raw[68:], dtype="<c16").reshape(nc, nx, ny, nz).copy()
    return GridField(vals, origin, spacing)


# ---------------------------------------------------------------------------
# differentiation backends


def wavenumbers(n: int, spacing: float) -> np.ndarray:
    return 2 * np.pi * np.fft.fftfreq(n, d=spacing)


def spectral_gradient(f: np.ndarray, spacing: Sequence[float], bloch=(0.0, 0.0, 0.0),
                      origin=(0.0, 0.0, 0.0)) -> np.ndarray:
    """Spectral gradient of each component; returns shape (3, ncomp, ...).

    The field is taken to be exp(i bloch.x) times a cell-periodic function,
    with x measured from the same coordinates as ``origin``.
    """
    f = np.asarray(f, dtype=complex)
    shape = f.shape[-3:]
    twisted = any(b != 0.0 for b in bloch)
    if twisted:
        phase = _twist_factor(shape, spacing, origin, bloch)
        f = f * np.conj(phase)
    ks = [wavenumbers(n, h) + b for n, h, b in zip(shape, spacing, bloch)]
    fh = np.fft.fftn(f, axes=(-3, -2, -1))
    out = np.empty((3,) + f.shape, dtype=complex)
    for ax in range(3):
        kshape = [1, 1, 1]
        kshape[ax] = shape[ax]
        out[ax] = np.fft.ifftn(1j * ks[ax].reshape(kshape) * fh, axes=(-3, -2, -1))
    if twisted:
        out *= phase
    return out


def spectral_laplacian(f: np.ndarray, spacing, bloch=(0.0, 0.0, 0.0), origin=(0.0, 0.0, 0.0)):
    f = np.asarray(f, dtype=complex)
    shape = f.shape[-3:]
    twisted = any(b != 0.0 for b in bloch)
    if twisted:
        phase = _twist_factor(shape, spacing, origin, bloch)
        f = f * np.conj(phase)
    k2 = sum(k ** 2 for k in np.meshgrid(
        *[wavenumbers(n, h) + b for n, h, b in zip(shape, spacing, bloch)], indexing="ij"))
    out = np.fft.ifftn(-k2 * np.fft.fftn(f, axes=(-3, -2, -1)), axes=(-3, -2, -1))
    return out * phase if twisted else out


def _twist_factor(shape, spacing, origin, bloch):
    axes = [o + h * np.arange(n) for o, h, n in zip(origin, spacing, shape)]
    pts = np.meshgrid(*axes, indexing="ij")
    return np.exp(1j * sum(b * p for b, p in zip(bloch, pts)))


def fd_gradient(f: np.ndarray, spacing: Sequence[float]) -> np.ndarray:
    """Second-order gradient: centered inside, one-sided at the edges."""
    f = np.asarray(f)
    nd = f.ndim
    return np.array([np.gradient(f, spacing[a], axis=nd - 3 + a, edge_order=2) for a in range(3)])


def twist(points: np.ndarray, bloch) -> np.ndarray:
    """exp(i bloch.x) on a grid of points."""
    return np.exp(1j * np.einsum("i,i...->...", np.asarray(bloch, dtype=float), points))


@dataclass(frozen=True)
class PeriodicCell:
    """Cubic-lattice periodic cell with cell-centred sample points.

    Points are ``center - side/2 + (j + 1/2) * side/n`` along each axis, so
    the plane through ``center`` lies halfway between samples. The dual
    lattice used by Fourier multipliers is shifted by ``offset_fraction``
    of a dual spacing 2 pi / side in every axis.
    """

    side: tuple = (8.0, 8.0, 8.0)
    n: int = 32
    center: tuple = (0.0, 0.0, 0.0)
    offset_fraction: float = 0.5

    def __post_init__(self):
        side = (float(self.side),) * 3 if np.isscalar(self.side) else tuple(float(s) for s in self.side)
        object.__setattr__(self, "side", side)
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))
        if self.n < 16 or self.n & (self.n - 1):
            raise ValueError(f"points per axis must be a power of two >= 16, got {self.n}")
        if any(s <= 0 for s in side):
            raise ValueError("cell side must be positive")

    @property
    def shape(self) -> tuple:
        return (self.n,) * 3

    @property
    def spacing(self) -> tuple:
        return tuple(s / self.n for s in self.side)

    @property
    def origin(self) -> tuple:
        return tuple(c - s / 2 + h / 2 for c, s, h in zip(self.center, self.side, self.spacing))

    @property
    def bounds(self):
        c, s = np.asarray(self.center), np.asarray(self.side)
        return c - s / 2, c + s / 2

    @property
    def bloch(self) -> tuple:
        return tuple(self.offset_fraction * 2 * np.pi / s for s in self.side)

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    def axes(self):
        return [o + h * np.arange(self.n) for o, h in zip(self.origin, self.spacing)]

    def points(self) -> np.ndarray:
        return np.array(np.meshgrid(*self.axes(), indexing="ij"))

    def dual_lattice(self) -> np.ndarray:
        """Shifted wavevectors kappa_n + delta, shape (3, n, n, n)."""
        ks = [wavenumbers(self.n, h) + b for h, b in zip(self.spacing, self.bloch)]
        return np.array(np.meshgrid(*ks, indexing="ij"))

    def jittered(self, factor: float) -> "PeriodicCell":
        return replace(self, side=tuple(s * factor for s in self.side))

    def grid_field(self, values, twisted: bool = True, **meta) -> GridField:
        return GridField(values, self.origin, self.spacing, periodic=True,
                         bloch=self.bloch if twisted else (0.0, 0.0, 0.0), meta=meta)


def fd4_gradient(f: np.ndarray, spacing: Sequence[float]) -> np.ndarray:
    """Fourth-order centred gradient inside, second-order one-sided near the edges."""
    f = np.asarray(f)
    nd = f.ndim
    out = fd_gradient(f, spacing)
    for a in range(3):
        ax = nd - 3 + a
        if f.shape[ax] < 5:
            continue
        fm = np.moveaxis(f, ax, 0)
        g = np.moveaxis(out[a], ax, 0)
        g[2:-2] = (fm[:-4] - 8 * fm[1:-3] + 8 * fm[3:-1] - fm[4:]) / (12 * spacing[a])
    return out
