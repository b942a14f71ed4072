"""Forward Maxwell solver in the slab by the Lax-Phillips splitting.

Fields follow curl E - i omega mu H = F1, curl H + i omega gamma E = F2.
All grid fields live on one node grid: x1, x2 in [-a, a] and x3 in [0, L]
including both faces. The constant-coefficient solve uses slab mode sums;
the variable-coefficient solve on an inner box uses a Yee (edge/face)
discretisation sharing the node lattice of the outer grid.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import LinearOperator, gmres, onenormest, splu

from .core_algebra import MaterialProfile
from .fields import GridField, fd4_gradient
from .slab_greens import ModeSpec, solve_helmholtz_slab

# ---------------------------------------------------------------------------
# grid, sources, cutoff


@dataclass(frozen=True)
class SlabGrid:
    """Node grid with n transverse cells on [-a, a] and n3 cells on [0, L]."""

    L: float = 1.0
    a: float = 2.0
    n: int = 64
    n3: int = 16

    @property
    def h(self) -> float:
        return 2 * self.a / self.n

    @property
    def hz(self) -> float:
        return self.L / self.n3

    @property
    def spacing(self):
        return (self.h, self.h, self.hz)

    @property
    def origin(self):
        return (-self.a, -self.a, 0.0)

    @property
    def shape(self):
        return (self.n + 1, self.n + 1, self.n3 + 1)

    def axes(self):
        t = np.linspace(-self.a, self.a, self.n + 1)
        return [t, t, np.linspace(0.0, self.L, self.n3 + 1)]

    def points(self):
        return np.array(np.meshgrid(*self.axes(), indexing="ij"))

    @property
    def cell_volume(self):
        return self.h * self.h * self.hz

    def field(self, values, **meta) -> GridField:
        return GridField(values, self.origin, self.spacing, meta=meta)

    def norm(self, values) -> float:
        return float(np.sqrt(np.sum(np.abs(values) ** 2) * self.cell_volume))


@dataclass
class SourcePair:
    f1: np.ndarray
    f2: np.ndarray

    def __post_init__(self):
        self.f1 = np.asarray(self.f1, dtype=complex)
        self.f2 = np.asarray(self.f2, dtype=complex)

    def ravel(self) -> np.ndarray:
        return np.concatenate([self.f1.ravel(), self.f2.ravel()])

    @classmethod
    def unravel(cls, v, shape) -> "SourcePair":
        n = int(np.prod(shape)) * 3
        return cls(v[:n].reshape((3,) + tuple(shape)), v[n:].reshape((3,) + tuple(shape)))

    @classmethod
    def zeros(cls, shape) -> "SourcePair":
        return cls(np.zeros((3,) + tuple(shape), complex), np.zeros((3,) + tuple(shape), complex))

    def __add__(self, other):
        return SourcePair(self.f1 + other.f1, self.f2 + other.f2)

    def __sub__(self, other):
        return SourcePair(self.f1 - other.f1, self.f2 - other.f2)

    def __mul__(self, s):
        return SourcePair(self.f1 * s, self.f2 * s)

    def norm(self, grid: SlabGrid) -> float:
        return float(np.hypot(grid.norm(self.f1), grid.norm(self.f2)))


def smoothstep(t):
    """C^2 quintic ramp: 0 for t <= 0, 1 for t >= 1."""
    t = np.clip(t, 0.0, 1.0)
    return t ** 3 * (10 - 15 * t + 6 * t ** 2)


def smoothstep_derivative(t):
    inside = (t > 0) & (t < 1)
    t = np.clip(t, 0.0, 1.0)
    return np.where(inside, 30 * t ** 2 * (1 - t) ** 2, 0.0)


@dataclass(frozen=True)
class CutoffSpec:
    """phi(x) = 1 for |x'| <= R', 0 for |x'| >= R'', a quintic ramp between.

    The cutoff depends on the transverse radius only, so it is constant
    across the slab faces. R is the radius of the ball holding the support.
    """

    R: float = 0.6
    R1: float = 0.8
    R2: float = 1.1

    def __post_init__(self):
        if not (0 < self.R < self.R1 < self.R2):
            raise ValueError("cutoff radii must satisfy 0 < R < R' < R''")

    def value(self, x):
        r = np.hypot(x[0], x[1])
        return 1.0 - smoothstep((r - self.R1) / (self.R2 - self.R1))

    def gradient(self, x):
        r = np.hypot(x[0], x[1])
        dr = -smoothstep_derivative((r - self.R1) / (self.R2 - self.R1)) / (self.R2 - self.R1)
        rs = np.where(r > 0, r, 1.0)
        return np.array([dr * x[0] / rs, dr * x[1] / rs, np.zeros_like(r)])


def curl_fd(v, spacing):
    g = fd4_gradient(v, spacing)
    return np.array([g[1, 2] - g[2, 1], g[2, 0] - g[0, 2], g[0, 1] - g[1, 0]])


def div_fd(v, spacing):
    g = fd4_gradient(v, spacing)
    return g[0, 0] + g[1, 1] + g[2, 2]


# ---------------------------------------------------------------------------
# trace lift and right-hand sides


def lift_profile(x3, L):
    """(x3 / L)^2: zero at x3 = 0, one at x3 = L, and smooth across the slab.

    A profile with a finite-smoothness switch-on inside the slab puts a kink
    into curl curl E_o, which the mode expansion resolves poorly.
    """
    return (np.asarray(x3) / L) ** 2


def trace_lift(f, grid: SlabGrid):
    """E_o = chi(x3) (f2, -f1, 0)(x') so that e3 ^ E_o = f on x3 = L.

    ``f`` holds the tangential datum on the plane grid: shape (3, nx, ny)
    with vanishing third component, or (2, nx, ny).
    """
    f = np.asarray(f, dtype=complex)
    if f.shape[0] == 3:
        if np.any(np.abs(f[2]) > 1e-14 * max(1.0, np.max(np.abs(f)))):
            raise ValueError("boundary datum must be tangential (zero normal component)")
        f = f[:2]
    chi = lift_profile(grid.axes()[2], grid.L)
    e = np.zeros((3,) + grid.shape, dtype=complex)
    e[0] = f[1][..., None] * chi
    e[1] = -f[0][..., None] * chi
    return e


def rhs_from_lift(e_o, mat: MaterialProfile, grid: SlabGrid) -> SourcePair:
    """Sources for E - E_o: F1 = -curl E_o, F2 = -i omega gamma E_o."""
    gamma = mat.gamma(grid.points())
    return SourcePair(-curl_fd(e_o, grid.spacing), -1j * mat.omega * gamma * e_o)


def helmholtz_rhs_G(src: SourcePair, mat: MaterialProfile, grid: SlabGrid):
    """G = i omega mu0 F2 + curl F1 - grad div F2 / (i omega eps0)."""
    w = mat.omega
    ddiv = fd4_gradient(div_fd(src.f2, grid.spacing), grid.spacing)
    return 1j * w * mat.mu0 * src.f2 + curl_fd(src.f1, grid.spacing) - ddiv / (1j * w * mat.eps0)


# ---------------------------------------------------------------------------
# constant-coefficient solve


@dataclass
class ConstantSolution:
    E: np.ndarray
    H: np.ndarray
    divergence_residual: float
    admissible: bool


def _laplacian_transverse(f, h):
    out = np.zeros_like(f)
    out[1:-1, :] += (f[2:, :] - 2 * f[1:-1, :] + f[:-2, :]) / h ** 2
    out[:, 1:-1] += (f[:, 2:] - 2 * f[:, 1:-1] + f[:, :-2]) / h ** 2
    return out


def solve_constant_maxwell(src: SourcePair, mat: MaterialProfile, grid: SlabGrid,
                           spec: ModeSpec) -> ConstantSolution:
    """Tangential E components by Dirichlet, normal component by Neumann potentials.

    The normal derivative of E3 on the faces equals div F2 / (i omega eps0);
    it is lifted by d_L x3^2/(2L) - d_0 (L - x3)^2/(2L) before the Neumann solve.
    """
    if abs(spec.k - mat.k) > 1e-12 * mat.k or abs(spec.L - grid.L) > 1e-12:
        raise ValueError("mode spec does not match the material wavenumber or slab width")
    mat.check_nonresonant(grid.L)
    shape = grid.shape
    for comp in (src.f1, src.f2):
        edge = np.concatenate([comp[:, [0, -1]].ravel(), comp[:, :, [0, -1]].ravel()])
        if np.any(np.abs(edge) > 1e-12 * max(1.0, np.max(np.abs(comp)))):
            raise ValueError("sources must vanish on the transverse edge of the grid")
    spec = spec.with_M(min(spec.M, grid.n3 - 1))
    w = mat.omega
    g = helmholtz_rhs_G(src, mat, grid)
    e = np.zeros((3,) + shape, dtype=complex)
    for c in (0, 1):
        e[c] = solve_helmholtz_slab(grid.field(g[c][None]), "dirichlet", spec).u.values[0]
    d = div_fd(src.f2, grid.spacing) / (1j * w * mat.eps0)
    d0, dl = d[..., 0], d[..., -1]
    x3 = grid.axes()[2]
    L = grid.L
    lift = dl[..., None] * x3 ** 2 / (2 * L) - d0[..., None] * (L - x3) ** 2 / (2 * L)
    lap_lift = (_laplacian_transverse(dl, grid.h)[..., None] * x3 ** 2 / (2 * L)
                - _laplacian_transverse(d0, grid.h)[..., None] * (L - x3) ** 2 / (2 * L)
                + ((dl - d0) / L)[..., None])
    g3 = g[2] + lap_lift + mat.k ** 2 * lift
    e[2] = lift + solve_helmholtz_slab(grid.field(g3[None]), "neumann", spec).u.values[0]
    hfield = (curl_fd(e, grid.spacing) - src.f1) / (1j * w * mat.mu0)
    divres = grid.norm(div_fd(e, grid.spacing) - div_fd(src.f2, grid.spacing) / (1j * w * mat.eps0))
    scale = max(grid.norm(div_fd(src.f2, grid.spacing) / (1j * w * mat.eps0)), grid.norm(e) / grid.L)
    # outgoing/decaying kernels make every retained mode admissible by construction
    return ConstantSolution(e, hfield, divres / scale if scale > 0 else 0.0, True)


# ---------------------------------------------------------------------------
# Yee solve on the inner box


def _diff(n_cells, h):
    """(n_cells x n_cells+1) forward difference."""
    return sp.diags([-np.ones(n_cells), np.ones(n_cells)], [0, 1], shape=(n_cells, n_cells + 1)) / h


def _kron3(a, b, c):
    return sp.kron(a, sp.kron(b, c, format="csr"), format="csr")


@dataclass
class YeeBox:
    """Sub-block of the node grid with |x1|, |x2| <= b used for the interior solve."""

    grid: SlabGrid
    b: float

    def __post_init__(self):
        axis = self.grid.axes()[0]
        sel = np.nonzero(np.abs(axis) <= self.b + 1e-12)[0]
        self.i0, self.i1 = int(sel[0]), int(sel[-1])
        self.nx = self.ny = self.i1 - self.i0
        self.nz = self.grid.n3
        if self.nx < 4:
            raise ValueError("inner box too small for the grid")
        self.hx = self.hy = self.grid.h
        self.hz = self.grid.hz
        self.lo = np.array([axis[self.i0], axis[self.i0], 0.0])
        self._build()

    # component shapes
    @property
    def edge_shapes(self):
        nx, ny, nz = self.nx, self.ny, self.nz
        return [(nx, ny + 1, nz + 1), (nx + 1, ny, nz + 1), (nx + 1, ny + 1, nz)]

    @property
    def face_shapes(self):
        nx, ny, nz = self.nx, self.ny, self.nz
        return [(nx + 1, ny, nz), (nx, ny + 1, nz), (nx, ny, nz + 1)]

    def edge_offsets(self):
        return [(0.5, 0, 0), (0, 0.5, 0), (0, 0, 0.5)]

    def face_offsets(self):
        return [(0, 0.5, 0.5), (0.5, 0, 0.5), (0.5, 0.5, 0)]

    def _positions(self, shape, off):
        ax = [self.lo[d] + (np.arange(shape[d]) + off[d]) * (self.hx, self.hy, self.hz)[d] for d in range(3)]
        return np.array(np.meshgrid(*ax, indexing="ij"))

    def edge_points(self):
        return [self._positions(s, o) for s, o in zip(self.edge_shapes, self.edge_offsets())]

    def face_points(self):
        return [self._positions(s, o) for s, o in zip(self.face_shapes, self.face_offsets())]

    def _build(self):
        nx, ny, nz = self.nx, self.ny, self.nz
        I = lambda n: sp.identity(n, format="csr")
        Dx, Dy, Dz = _diff(nx, self.hx), _diff(ny, self.hy), _diff(nz, self.hz)
        Z = lambda r, c: sp.csr_matrix((r, c))
        es = [int(np.prod(s)) for s in self.edge_shapes]
        fs = [int(np.prod(s)) for s in self.face_shapes]
        # faces x: dy Ez - dz Ey
        cx_ey = -_kron3(I(nx + 1), I(ny), Dz)
        cx_ez = _kron3(I(nx + 1), Dy, I(nz))
        # faces y: dz Ex - dx Ez
        cy_ex = _kron3(I(nx), I(ny + 1), Dz)
        cy_ez = -_kron3(Dx, I(ny + 1), I(nz))
        # faces z: dx Ey - dy Ex
        cz_ex = -_kron3(I(nx), Dy, I(nz + 1))
        cz_ey = _kron3(Dx, I(ny), I(nz + 1))
        self.curl = sp.bmat([[Z(fs[0], es[0]), cx_ey, cx_ez],
                             [cy_ex, Z(fs[1], es[1]), cy_ez],
                             [cz_ex, cz_ey, Z(fs[2], es[2])]], format="csr")
        masks = []
        for c, s in enumerate(self.edge_shapes):
            m = np.zeros(s, dtype=bool)
            for d in range(3):
                if d == c:
                    continue
                idx = [slice(None)] * 3
                idx[d] = 0
                m[tuple(idx)] = True
                idx[d] = -1
                m[tuple(idx)] = True
            masks.append(m.ravel())
        self.boundary = np.concatenate(masks)
        self.interior = ~self.boundary
        self.n_edges = sum(es)
        self.n_faces = sum(fs)

    # node <-> staggered transfers (node arrays restricted to the box)
    def node_block(self, v):
        return np.asarray(v)[..., self.i0:self.i1 + 1, self.i0:self.i1 + 1, :]

    def nodes_to_edges(self, v):
        v = self.node_block(v)
        parts = [0.5 * (v[0, 1:] + v[0, :-1]),
                 0.5 * (v[1][:, 1:] + v[1][:, :-1]),
                 0.5 * (v[2][..., 1:] + v[2][..., :-1])]
        return np.concatenate([p.ravel() for p in parts])

    def nodes_to_faces(self, v):
        v = self.node_block(v)
        avg = lambda a, ax1, ax2: 0.25 * (_sl(a, ax1, 1, ax2, 1) + _sl(a, ax1, 0, ax2, 1)
                                          + _sl(a, ax1, 1, ax2, 0) + _sl(a, ax1, 0, ax2, 0))
        parts = [avg(v[0], 1, 2), avg(v[1], 0, 2), avg(v[2], 0, 1)]
        return np.concatenate([p.ravel() for p in parts])

    def split_edges(self, e):
        out, k = [], 0
        for s in self.edge_shapes:
            n = int(np.prod(s))
            out.append(e[k:k + n].reshape(s))
            k += n
        return out

    def split_faces(self, f):
        out, k = [], 0
        for s in self.face_shapes:
            n = int(np.prod(s))
            out.append(f[k:k + n].reshape(s))
            k += n
        return out

    def edges_to_nodes(self, e):
        ex, ey, ez = self.split_edges(e)
        return np.array([_avg_to_nodes(ex, 0), _avg_to_nodes(ey, 1), _avg_to_nodes(ez, 2)])

    def faces_to_nodes(self, f):
        hx, hy, hz = self.split_faces(f)
        return np.array([_avg_to_nodes(_avg_to_nodes(hx, 1), 2),
                         _avg_to_nodes(_avg_to_nodes(hy, 0), 2),
                         _avg_to_nodes(_avg_to_nodes(hz, 0), 1)])

    def embed(self, node_values, shape):
        out = np.zeros((3,) + tuple(shape), dtype=complex)
        out[:, self.i0:self.i1 + 1, self.i0:self.i1 + 1, :] = node_values
        return out

    def inside_mask(self):
        m = np.zeros(self.grid.shape, dtype=bool)
        m[self.i0:self.i1 + 1, self.i0:self.i1 + 1, :] = True
        return m


def _sl(a, ax1, o1, ax2, o2):
    idx = [slice(None)] * a.ndim
    idx[ax1] = slice(1, None) if o1 else slice(None, -1)
    idx[ax2] = slice(1, None) if o2 else slice(None, -1)
    return a[tuple(idx)]


def _avg_to_nodes(a, axis):
    """Average staggered values onto nodes along ``axis`` (one-sided at the ends)."""
    a = np.moveaxis(a, axis, 0)
    out = np.empty((a.shape[0] + 1,) + a.shape[1:], dtype=a.dtype)
    out[1:-1] = 0.5 * (a[1:] + a[:-1])
    out[0] = a[0]
    out[-1] = a[-1]
    return np.moveaxis(out, 0, axis)


@dataclass
class InteriorSolver:
    """Factorised Yee system for one material on one inner box."""

    mat: MaterialProfile
    box: YeeBox
    cond_limit: float = 1e12

    def __post_init__(self):
        w = self.mat.omega
        box = self.box
        inv_mu = np.concatenate([1.0 / self.mat.mu(p).ravel() for p in box.face_points()])
        gam = np.concatenate([self.mat.gamma(p).ravel() for p in box.edge_points()])
        self.inv_mu = inv_mu
        self.gamma_e = gam
        self.mu_f = 1.0 / inv_mu
        a = (box.curl.T @ sp.diags(inv_mu) @ box.curl - w ** 2 * sp.diags(gam)).tocsc()
        ii, bb = box.interior, box.boundary
        self.a_ii = a[ii][:, ii].tocsc()
        self.a_ib = a[ii][:, bb].tocsc()
        self.lu = splu(self.a_ii, permc_spec="MMD_AT_PLUS_A")
        inv = LinearOperator(self.a_ii.shape, matvec=self.lu.solve,
                             rmatvec=lambda v: self.lu.solve(v, trans="H"), dtype=complex)
        self.inverse_norm = float(onenormest(inv))
        self.condition = self.inverse_norm * float(sp.linalg.norm(self.a_ii, 1))
        if not np.isfinite(self.condition) or self.condition > self.cond_limit:
            raise RuntimeError(f"interior system nearly singular (condition ~ {self.condition:.2e}); "
                               "omega is close to an eigenvalue of the inner box; resize the box")

    def solve_staggered(self, e_boundary, s1_faces, s2_edges):
        """Solve with boundary edge values and staggered sources; returns (E, H, residual)."""
        box, w = self.box, self.mat.omega
        rhs = 1j * w * s2_edges + box.curl.T @ (self.inv_mu * s1_faces)
        e = np.zeros(box.n_edges, dtype=complex)
        e[box.boundary] = e_boundary
        e[box.interior] = self.lu.solve(rhs[box.interior] - self.a_ib @ e_boundary)
        h = (box.curl @ e - s1_faces) / (1j * w * self.mu_f)
        r_int = box.curl.T @ h + 1j * w * self.gamma_e * e - s2_edges
        scale = max(np.linalg.norm(1j * w * self.gamma_e * e), np.linalg.norm(s2_edges), 1e-300)
        return e, h, float(np.linalg.norm(r_int[box.interior]) / scale)

    def solve(self, boundary_e_nodes, src: SourcePair):
        """Node-level interface: boundary data from node E, node sources."""
        box = self.box
        eb = box.nodes_to_edges(boundary_e_nodes)[box.boundary]
        s1 = box.nodes_to_faces(src.f1)
        s2 = box.nodes_to_edges(src.f2)
        e, h, res = self.solve_staggered(eb, s1, s2)
        shape = box.grid.shape
        return (box.embed(box.edges_to_nodes(e), shape), box.embed(box.faces_to_nodes(h), shape),
                dict(residual=res, condition=self.condition, e_edges=e, h_faces=h, s2_edges=s2))

    def poynting_balance(self, e, h, s2_edges):
        """Discrete energy identity of a staggered solution.

        Summing conj(E) times the interior edge equation gives
        sum_all conj(E) C^T H + flux + i omega sum gamma |E|^2 = sum conj(E) s2,
        with flux = -sum over boundary edges of conj(E) (C^T H). With real mu
        and no source the real part balances the boundary flux against the
        ohmic loss omega Im(gamma) |E|^2.
        """
        box, w = self.box, self.mat.omega
        ii = box.interior
        ct_h = box.curl.T @ h
        flux = -np.vdot(e[box.boundary], ct_h[box.boundary])
        magnetic = np.vdot(e, ct_h)
        absorption = 1j * w * np.vdot(e[ii], self.gamma_e[ii] * e[ii])
        work = np.vdot(e[ii], s2_edges[ii])
        mismatch = abs(magnetic + flux + absorption - work)
        scale = max(abs(absorption), abs(work), abs(magnetic), abs(flux), 1e-300)
        return dict(flux=complex(flux), magnetic=complex(magnetic), absorption=complex(absorption),
                    work=complex(work), relative_mismatch=float(mismatch / scale))


def interior_solver(mat: MaterialProfile, boundary_e_nodes, src: SourcePair, box: YeeBox, solver=None):
    """Solve the variable-coefficient Maxwell pair on the inner box."""
    solver = solver or InteriorSolver(mat, box)
    return solver.solve(boundary_e_nodes, src)


# ---------------------------------------------------------------------------
# Lax-Phillips coupling


@dataclass
class LaxPhillipsContext:
    """Reusable pieces for repeated applications of K."""

    mat: MaterialProfile
    grid: SlabGrid
    spec: ModeSpec
    cutoff: CutoffSpec
    box_half_width: float
    interior: InteriorSolver = None
    background: MaterialProfile = None

    def __post_init__(self):
        if self.box_half_width <= self.cutoff.R2:
            raise ValueError("inner box must contain the cutoff transition region")
        if self.box_half_width >= self.grid.a:
            raise ValueError("inner box must lie inside the sampled region")
        lo, hi = self.mat.support
        if not self.mat.is_constant and max(np.max(np.abs(lo[:2])), np.max(np.abs(hi[:2]))) >= self.cutoff.R:
            raise ValueError("material support must lie within |x'| < R")
        self.box = YeeBox(self.grid, self.box_half_width)
        self.interior = self.interior or InteriorSolver(self.mat, self.box)
        self.background = MaterialProfile(self.mat.omega, self.mat.mu0, self.mat.eps0)
        pts = self.grid.points()
        self.phi = self.cutoff.value(pts)
        self.grad_phi = self.cutoff.gradient(pts)
        self.dmu = self.mat.mu(pts) - self.mat.mu0
        self.dgamma = self.mat.gamma(pts) - self.mat.eps0

    def constant_solve(self, src: SourcePair) -> ConstantSolution:
        return solve_constant_maxwell(src, self.background, self.grid, self.spec)

    def difference_fields(self, e1, h1):
        """(E2 - E1, H2 - H1) from the scattered-field interior problem."""
        w = self.mat.omega
        s = SourcePair(1j * w * self.dmu * h1, -1j * w * self.dgamma * e1)
        zero = np.zeros((3,) + self.grid.shape, dtype=complex)
        de, dh, info = self.interior.solve(zero, s)
        return de, dh, info

    def apply_K(self, src: SourcePair) -> SourcePair:
        sol = self.constant_solve(src)
        de, dh, _ = self.difference_fields(sol.E, sol.H)
        g = self.grad_phi
        return SourcePair(np.cross(g, de, axis=0), np.cross(g, dh, axis=0))


def apply_K(src: SourcePair, mat: MaterialProfile, cutoff: CutoffSpec, grid: SlabGrid,
            spec: ModeSpec, box_half_width: float) -> SourcePair:
    return LaxPhillipsContext(mat, grid, spec, cutoff, box_half_width).apply_K(src)


@dataclass
class LaxPhillipsResult:
    E: np.ndarray
    H: np.ndarray
    f_tilde: SourcePair
    iterations: int
    krylov_residual: float
    maxwell_residual: float
    history: list = field(default_factory=list)
    runtime: float = 0.0


def maxwell_residual(e, h, src: SourcePair, mat: MaterialProfile, grid: SlabGrid, margin: int = 2):
    """Relative FD residual of both Maxwell equations on interior nodes.

    ``margin`` layers are dropped on every side, including the slab faces where
    the nested one-sided differences are only first-order accurate.
    """
    pts = grid.points()
    w = mat.omega
    r1 = curl_fd(e, grid.spacing) - 1j * w * mat.mu(pts) * h - src.f1
    r2 = curl_fd(h, grid.spacing) + 1j * w * mat.gamma(pts) * e - src.f2
    sl = (slice(None),) + (slice(margin, -margin),) * 3
    num = np.hypot(grid.norm(r1[sl]), grid.norm(r2[sl]))
    den = np.hypot(grid.norm((1j * w * mat.mu(pts) * h)[sl]), grid.norm((1j * w * mat.gamma(pts) * e)[sl]))
    den = max(den, np.hypot(grid.norm(src.f1), grid.norm(src.f2)))
    return float(num / den)


def solve_lax_phillips(f_pair: SourcePair, ctx: LaxPhillipsContext, tol: float = 1e-8,
                       maxiter: int = 60) -> LaxPhillipsResult:
    """Solve (I + K) F~ = F and assemble E = E1 - phi (E1 - E2)."""
    t0 = time.perf_counter()
    shape = ctx.grid.shape
    b = f_pair.ravel()
    history = []

    def op(v):
        s = SourcePair.unravel(v, shape)
        return (s + ctx.apply_K(s)).ravel()

    a = LinearOperator((b.size, b.size), matvec=op, dtype=complex)
    sol, info = gmres(a, b, rtol=tol, atol=0.0, restart=maxiter, maxiter=1,
                      callback=lambda r: history.append(float(r)), callback_type="pr_norm")
    res = float(np.linalg.norm(op(sol) - b) / np.linalg.norm(b)) if np.any(b) else 0.0
    if res > 10 * tol:
        raise RuntimeError(f"Lax-Phillips Krylov iteration stagnated at residual {res:.3e}")
    ft = SourcePair.unravel(sol, shape)
    c = ctx.constant_solve(ft)
    de, dh, _ = ctx.difference_fields(c.E, c.H)
    e = c.E + ctx.phi * de
    h = c.H + ctx.phi * dh
    mres = maxwell_residual(e, h, f_pair, ctx.mat, ctx.grid)
    return LaxPhillipsResult(e, h, ft, len(history), res, mres, history, time.perf_counter() - t0)
