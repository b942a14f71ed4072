"""Reflections across the slab faces x3 = 0 and x3 = L.

The plane ``gamma2`` is {x3 = 0} and ``gamma1`` is {x3 = L}. A field X is
reflected as S X(Rx) with S = diag(-1, 1, 1, -1, 1, -1, -1, 1), which flips
Phi, the normal H component and the tangential E components.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core_algebra import MaterialProfile
from .fields import PeriodicCell

PLANES = ("gamma1", "gamma2")
SIGN_I4 = np.array([-1.0, 1.0, 1.0, -1.0])
REFLECTION_SIGNS = np.concatenate([SIGN_I4, -SIGN_I4])


def _check_plane(plane):
    if plane not in PLANES:
        raise ValueError(f"unknown plane {plane!r}; expected one of {PLANES}")


def plane_height(plane: str, L: float) -> float:
    _check_plane(plane)
    return L if plane == "gamma1" else 0.0


def outward_normal(plane: str) -> np.ndarray:
    _check_plane(plane)
    return np.array([0.0, 0.0, 1.0 if plane == "gamma1" else -1.0])


@dataclass(frozen=True)
class SlabGeometry:
    """Slab {0 < x3 < L}, an inner box and three cutoff radii."""

    L: float = 1.0
    box_lo: tuple = (-1.0, -1.0, 0.0)
    box_hi: tuple = (1.0, 1.0, 1.0)
    R: float = 1.0
    R1: float = 1.5
    R2: float = 2.0

    def __post_init__(self):
        object.__setattr__(self, "box_lo", tuple(float(v) for v in self.box_lo))
        object.__setattr__(self, "box_hi", tuple(float(v) for v in self.box_hi))
        if self.L <= 0:
            raise ValueError("slab width must be positive")
        if not (0 < self.R < self.R1 < self.R2):
            raise ValueError("cutoff radii must satisfy 0 < R < R' < R''")
        if self.box_lo[2] < 0 or self.box_hi[2] > self.L or any(a >= b for a, b in zip(self.box_lo, self.box_hi)):
            raise ValueError("inner box must be a nonempty box inside the slab")

    def reflected_box(self, plane: str):
        h = plane_height(plane, self.L)
        lo, hi = list(self.box_lo), list(self.box_hi)
        lo[2], hi[2] = 2 * h - self.box_hi[2], 2 * h - self.box_lo[2]
        return tuple(lo), tuple(hi)

    def union_box(self, plane: str = "gamma2"):
        """Box hull of the inner box and its mirror image (the domain O)."""
        rlo, rhi = self.reflected_box(plane)
        return tuple(map(min, self.box_lo, rlo)), tuple(map(max, self.box_hi, rhi))


def reflect_point(x, plane: str, L: float = 1.0) -> np.ndarray:
    _check_plane(plane)
    y = np.array(x, dtype=float, copy=True)
    y[2] = 2 * plane_height(plane, L) - y[2]
    return y


def reflect_values(u) -> np.ndarray:
    """Apply the sign pattern S to an 8-field array."""
    u = np.asarray(u)
    return REFLECTION_SIGNS.reshape((8,) + (1,) * (u.ndim - 1)) * u


def reflect_field8(f, plane: str, L: float = 1.0):
    """The reflected field x -> S f(Rx) of an 8-field-valued function."""
    _check_plane(plane)

    def reflected(x):
        return reflect_values(f(reflect_point(x, plane, L)))

    return reflected


def tangential_trace(e_field, plane: str) -> np.ndarray:
    """nu ^ E for a 3-vector field sampled on the plane (leading axis 3)."""
    e = np.asarray(e_field)
    nu = outward_normal(plane).reshape((3,) + (1,) * (e.ndim - 1))
    return np.cross(nu, e, axis=0)


def check_parameter_symmetry(mat: MaterialProfile, plane: str, L: float = 1.0,
                             n: int = 2000, seed: int = 0, atol: float = 1e-12):
    """Compare mu and gamma at random mirror pairs around the support."""
    rng = np.random.default_rng(seed)
    lo, hi = mat.support
    h = plane_height(plane, L)
    lo = np.minimum(lo, [lo[0], lo[1], 2 * h - hi[2]]) - 0.5
    hi = np.maximum(hi, [hi[0], hi[1], 2 * h - lo[2]]) + 0.5
    x = lo[:, None] + (hi - lo)[:, None] * rng.random((3, n))
    y = reflect_point(x, plane, L)
    mismatch = max(float(np.max(np.abs(mat.mu(x) - mat.mu(y)))),
                   float(np.max(np.abs(mat.gamma(x) - mat.gamma(y)))))
    return mismatch <= atol, mismatch


# ---------------------------------------------------------------------------
# grids whose sample planes straddle a reflection plane


def mirror_indices(axis: np.ndarray, height: float, rtol: float = 1e-9) -> np.ndarray:
    """Index map j -> j' with axis[j'] = 2 height - axis[j]; -1 where out of range.

    The grid must be uniform and ``height`` a node or a midpoint between nodes.
    """
    axis = np.asarray(axis, dtype=float)
    h = axis[1] - axis[0]
    pos = 2 * (height - axis[0]) / h
    if abs(pos - round(pos)) > rtol * max(1.0, abs(pos)):
        raise ValueError(f"plane x3 = {height} is not aligned with the grid")
    jp = int(round(pos)) - np.arange(axis.size)
    return np.where((jp >= 0) & (jp < axis.size), jp, -1)


def reflect_grid_values(values, axis3, plane: str, L: float):
    """S u(Rx) on the grid and the mask of points whose mirror is sampled."""
    jp = mirror_indices(axis3, plane_height(plane, L))
    ok = jp >= 0
    out = np.full(np.shape(values), np.nan + 0j, dtype=complex)
    out[..., ok] = np.asarray(values)[..., jp[ok]]
    return reflect_values(out), ok


def face_layer(values, axis3, height: float):
    """Linear interpolation of a grid field onto the plane x3 = height."""
    axis3 = np.asarray(axis3)
    j = int(np.searchsorted(axis3, height)) - 1
    if j < 0 or j + 1 >= axis3.size:
        raise ValueError("plane outside the sampled range")
    t = (height - axis3[j]) / (axis3[j + 1] - axis3[j])
    v = np.asarray(values)
    return (1 - t) * v[..., j] + t * v[..., j + 1]


def trace_cancellation(x_values, cell: PeriodicCell, plane: str, L: float):
    """Max |nu ^ E| of X + reflected X on the plane, relative to max |X|.

    On the plane R x = x, so the reflected field there is S X(x) and the
    tangential electric components of the sum cancel.
    """
    axis3 = cell.axes()[2]
    height = plane_height(plane, L)
    refl, ok = reflect_grid_values(x_values, axis3, plane, L)
    total = np.asarray(x_values) + np.where(ok, refl, 0.0)
    on_plane = face_layer(total, axis3, height)
    trace = tangential_trace(on_plane[5:8], plane)
    scale = float(np.max(np.abs(x_values)))
    return float(np.max(np.abs(trace))) / scale if scale > 0 else 0.0
