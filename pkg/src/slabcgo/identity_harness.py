"""Quadrature checks of the integral identities behind the uniqueness argument.

Two profiles (mu1, gamma1) and (mu2, gamma2) give the contrast quantities

    mu_tilde = omega (mu2 - mu1) / (mu1 mu2)^(1/2)
    mu_hat   = omega (mu1 + mu2) / (mu1 mu2)^(1/2)

and the same with gamma. Integrals are midpoint sums on a periodic cell whose
sample planes are symmetric about the reflection planes. Products of CGO
fields are formed from phase-stripped amplitudes and an analytic exponent, so
no exponentially large number is ever stored.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from scipy.signal import resample

from .cgo_phase import (AmplitudeSpec, PhasePair, build_phase, build_Z0, canonical_amplitudes,
                        exponent_phi, leading_Y)
from .core_algebra import Bump, MaterialProfile, assemble_V
from .faddeev import (CorrectorResult, build_full_Y, conjugated_multiplier, limit_R_residual,
                      potential_on_cell, solve_corrector)
from .fields import (PeriodicCell, bilinear, cross_matrix, diag_apply, fd4_gradient, matvec, pack,
                     spectral_gradient)
from .reflect import REFLECTION_SIGNS, check_parameter_symmetry, mirror_indices

TERMS = ("lim1", "lim2", "lim3", "lim4")
CROSS_TERMS = ("term2", "term3", "term4")


def _dot(a, b):
    """Bilinear (unconjugated) dot product over the leading axis."""
    return np.einsum("i...,i...->...", a, b)


def _bcast(vec, ndim):
    return np.asarray(vec).reshape((-1,) + (1,) * ndim)


# ---------------------------------------------------------------------------
# profile pairs


@dataclass(frozen=True)
class TwoProfiles:
    """Two material profiles sharing frequency and background."""

    mat1: MaterialProfile
    mat2: MaterialProfile

    def __post_init__(self):
        a, b = self.mat1, self.mat2
        if (a.omega, a.mu0, a.eps0) != (b.omega, b.mu0, b.eps0):
            raise ValueError("profiles must share omega, mu0 and eps0")

    @property
    def omega(self) -> float:
        return self.mat1.omega

    @property
    def k(self) -> float:
        return self.mat1.k

    @property
    def identical(self) -> bool:
        return (self.mat1.mu_bumps, self.mat1.gamma_bumps) == (self.mat2.mu_bumps, self.mat2.gamma_bumps)

    def contrast(self, x) -> dict:
        """Pointwise contrast quantities and their analytic derivatives."""
        w = self.omega
        d1, d2 = self.mat1.derived(x), self.mat2.derived(x)
        out = dict(mu1=d1["mu"], mu2=d2["mu"], gamma1=d1["gamma"], gamma2=d2["gamma"],
                   kappa1=d1["kappa"], kappa2=d2["kappa"],
                   alpha1=d1["alpha"], alpha2=d2["alpha"], beta1=d1["beta"], beta2=d2["beta"],
                   div_alpha1=np.einsum("ii...->...", d1["jac_alpha"]),
                   div_alpha2=np.einsum("ii...->...", d2["jac_alpha"]),
                   div_beta1=np.einsum("ii...->...", d1["jac_beta"]),
                   div_beta2=np.einsum("ii...->...", d2["jac_beta"]))
        for name, log1, log2, j1, j2, p1, p2 in (
                ("v", d1["beta"], d2["beta"], out["div_beta1"], out["div_beta2"], d1["mu"], d2["mu"]),
                ("u", d1["alpha"], d2["alpha"], out["div_alpha1"], out["div_alpha2"], d1["gamma"], d2["gamma"])):
            # s = (p1 / p2)^(1/2): grad s = s d / 2, lap s = s (d.d / 2 + div d) / 2 with d = grad log(p1/p2)
            s = np.sqrt(p1 / p2)
            d = log1 - log2
            grad = 0.5 * s * d
            lap = 0.5 * s * (0.5 * _dot(d, d) + (j1 - j2))
            tilde = w * (1.0 / s - s)
            hat = w * (1.0 / s + s)
            grad_inv = -grad / s ** 2
            out.update({name: s, f"grad_{name}": grad, f"lap_{name}": lap, f"grad_inv_{name}": grad_inv})
            key = "mu" if name == "v" else "gamma"
            out.update({f"{key}_tilde": tilde, f"{key}_hat": hat,
                        f"grad_{key}_tilde": w * (grad_inv - grad), f"grad_{key}_hat": w * (grad_inv + grad)})
        return out

    def boundary_report(self, lo, hi, n: int = 9) -> dict:
        """Agreement of the two profiles on the faces of the box [lo, hi].

        Values and normal derivatives of the differences should vanish, the
        tilde quantities vanish and the hat quantities equal 2 omega.
        """
        lo, hi = np.asarray(lo, float), np.asarray(hi, float)
        value = deriv = tilde = hat = 0.0
        for axis in range(3):
            for side in (lo, hi):
                ax = [np.linspace(lo[i], hi[i], n) for i in range(3)]
                ax[axis] = np.array([side[axis]])
                x = np.array(np.meshgrid(*ax, indexing="ij")).reshape(3, -1)
                m1, dm1, _ = self.mat1.mu_jet(x, 1)
                m2, dm2, _ = self.mat2.mu_jet(x, 1)
                g1, dg1, _ = self.mat1.gamma_jet(x, 1)
                g2, dg2, _ = self.mat2.gamma_jet(x, 1)
                value = max(value, float(np.max(np.abs(m1 - m2))), float(np.max(np.abs(g1 - g2))))
                deriv = max(deriv, float(np.max(np.abs(dm1[axis] - dm2[axis]))),
                            float(np.max(np.abs(dg1[axis] - dg2[axis]))))
                c = self.contrast(x)
                tilde = max(tilde, float(np.max(np.abs(c["mu_tilde"]))), float(np.max(np.abs(c["gamma_tilde"]))))
                hat = max(hat, float(np.max(np.abs(c["mu_hat"] - 2 * self.omega))),
                          float(np.max(np.abs(c["gamma_hat"] - 2 * self.omega))))
        return dict(value_mismatch=value, normal_derivative_mismatch=deriv,
                    tilde_max=tilde, hat_deviation=hat)


def contrast_pair(omega: float = 1.0, contrast: float = 0.05, kind: str = "poly",
                  center=(0.0, 0.0, 0.5), radius: float = 0.35, mu0: float = 1.0,
                  eps0: float = 1.0) -> TwoProfiles:
    """A small-contrast pair: mat1 is the background, mat2 carries mu and gamma bumps."""
    c2 = (center[0] + 0.1 * radius, center[1] - 0.1 * radius, center[2])
    base = MaterialProfile(omega, mu0, eps0)
    other = MaterialProfile(omega, mu0, eps0, (Bump(kind, center, radius, contrast),),
                            (Bump(kind, c2, radius, contrast * (1.5 + 0.5j)),))
    return TwoProfiles(base, other)


def mirrored_pair(omega: float = 1.0, contrast: float = 0.05, kind: str = "poly", L: float = 1.0,
                  radius: float = 0.45, mu0: float = 1.0, eps0: float = 1.0) -> TwoProfiles:
    """A pair for the opposite-plane scenario, both profiles perturbed inside the slab.

    mat1 is even across x3 = 0 and mat2 is even across x3 = L: each carries a
    bump at mid-slab plus its mirror image outside the slab.
    """
    mid = 0.5 * L
    if radius >= mid:
        raise ValueError("bump radius must be below L / 2 so the bumps stay inside the slab")

    def pair(center, amp, height):
        b = Bump(kind, center, radius, amp)
        return (b, b.reflected(height))

    s = 0.1 * radius
    mat1 = MaterialProfile(omega, mu0, eps0, pair((s, 0.0, mid), 0.6 * contrast, 0.0),
                           pair((0.0, s, mid), contrast * (0.4 - 0.3j), 0.0))
    mat2 = MaterialProfile(omega, mu0, eps0, pair((0.0, 0.0, mid), contrast, L),
                           pair((-s, 0.0, mid), contrast * (1.5 + 0.5j), L))
    return TwoProfiles(mat1, mat2)


# ---------------------------------------------------------------------------
# the operator U and the integral identity


def _gradient_blocks(a, c, wedge_sign_a: float, wedge_sign_c: float, shape) -> np.ndarray:
    """[[0,0,0,a.],[0,0,a,sa a^],[0,c.,0,0],[c,-sc c^,0,0]] as an 8x8 field."""
    m = np.zeros((8, 8) + shape, dtype=complex)
    m[0, 5:8] = a
    m[1:4, 4] = a
    m[1:4, 5:8] = wedge_sign_a * cross_matrix(a)
    m[4, 1:4] = c
    m[5:8, 0] = c
    m[5:8, 1:4] = -wedge_sign_c * cross_matrix(c)
    return m


def u_from_contrast(c: dict) -> np.ndarray:
    shape = np.shape(c["mu_tilde"])
    mt, gt = c["mu_tilde"], c["gamma_tilde"]
    k1, k2 = c["kappa1"], c["kappa2"]
    out = np.zeros((8, 8) + shape, dtype=complex)
    for i in range(4):
        out[i, i] = k2 * gt + k1 * mt
    for i in range(4, 8):
        out[i, i] = k2 * mt + k1 * gt
    out += 1j * _gradient_blocks(c["grad_mu_hat"], c["grad_gamma_hat"], 1.0, 1.0, shape)
    out -= 1j * _gradient_blocks(c["grad_mu_tilde"], c["grad_gamma_tilde"], -1.0, -1.0, shape)
    return out


def assemble_U(profiles: TwoProfiles, pos) -> np.ndarray:
    """The 8x8 field U with diag(mu~, gamma~) Y1 . conj(Y2) = U Z1 . conj(Y2) after integration by parts."""
    return u_from_contrast(profiles.contrast(np.asarray(pos, dtype=float)))


def _values(f):
    return np.asarray(getattr(f, "values", f))


def integral_identity(x1, x2, profiles: TwoProfiles, points, cell_volume: float,
                      weight=None, mask=None, diag_only: bool = False) -> complex:
    """Midpoint quadrature of (V2 - V1) X1 . conj(X2), optionally weighted and masked.

    ``diag_only`` keeps only omega diag(mu2 - mu1, gamma2 - gamma1); for
    Maxwell candidates the two versions agree.
    """
    points = np.asarray(points, dtype=float)
    a, b = _values(x1), _values(x2)
    if diag_only:
        w = profiles.omega
        dm = profiles.mat2.mu(points) - profiles.mat1.mu(points)
        dg = profiles.mat2.gamma(points) - profiles.mat1.gamma(points)
        va = diag_apply(w * dm, w * dg, a)
    else:
        dv = assemble_V(profiles.mat2, points) - assemble_V(profiles.mat1, points)
        va = matvec(dv, a)
    integrand = bilinear(va, b)
    if weight is not None:
        integrand = integrand * weight
    if mask is not None:
        integrand = np.where(mask, integrand, 0.0)
    return complex(np.sum(integrand) * cell_volume)


def x_from_y(y, mat: MaterialProfile, points) -> np.ndarray:
    """X = diag(mu^-1/2, gamma^-1/2) Y."""
    points = np.asarray(points, dtype=float)
    return diag_apply(mat.mu(points) ** -0.5, mat.gamma(points) ** -0.5, _values(y))


# ---------------------------------------------------------------------------
# numerical CGO layers


@dataclass
class CGOLayers:
    """One phase-stripped CGO solution with its asymptotic layers."""

    phase: PhasePair
    which: int
    mat: MaterialProfile
    amplitude: AmplitudeSpec
    z0: np.ndarray
    corrector: CorrectorResult
    y: object
    y_residual: float

    @property
    def cell(self) -> PeriodicCell:
        return self.corrector.cell

    @property
    def zeta(self) -> np.ndarray:
        return self.phase.zeta(self.which)

    @property
    def z(self) -> np.ndarray:
        """Stripped Z = Z0 + psi."""
        return self.z0.reshape(8, 1, 1, 1) + np.asarray(self.corrector.psi.values)

    @property
    def z_minus1(self) -> np.ndarray:
        return np.asarray(self.corrector.z_minus1.values)

    @property
    def y_values(self) -> np.ndarray:
        return np.asarray(self.y.values)

    @property
    def y_residual_field(self) -> np.ndarray:
        return np.asarray(self.y.meta["residual_field"])

    def layers(self):
        """(Y_1, Y_0): the constant O(tau) layer and the O(1) field layer."""
        return leading_Y(self.z0, self.z_minus1, self.phase, self.mat, self.cell.points(), self.which)

    def r_surrogate(self) -> np.ndarray:
        """tau Z_{-1}, the finite-tau stand-in for its limit."""
        return self.phase.tau * self.z_minus1

    def r_gradient(self) -> np.ndarray:
        c = self.cell
        return spectral_gradient(self.r_surrogate(), c.spacing, c.bloch, c.origin)


def cgo_layers(mat: MaterialProfile, pp: PhasePair, which: int, amp: AmplitudeSpec,
               cell: PeriodicCell, tol: float = 1e-10, q=None) -> CGOLayers:
    """Solve for the corrector of the ``which``-th CGO of ``pp`` and build Y."""
    zeta = pp.zeta(which)
    z0 = build_Z0(pp, amp, which)
    q = potential_on_cell(mat, cell) if q is None else q
    mult = conjugated_multiplier(zeta, cell, pp.tau)
    res = solve_corrector(q, zeta, z0, cell, tol=tol, multiplier=mult)
    y, rel = build_full_Y(res, zeta, z0, mat)
    return CGOLayers(pp, which, mat, amp, z0, res, y, rel)


def cgo_pair(profiles: TwoProfiles, pp: PhasePair, cell: PeriodicCell, choice: str = "beta",
             amplitudes=None, tol: float = 1e-10, potentials=None):
    """CGO 1 for (mu1, gamma1) with zeta1 and CGO 2 for (mu2, conj gamma2) with zeta2."""
    amp1, amp2 = amplitudes or canonical_amplitudes(pp, choice)
    q1, q2 = potentials or (None, None)
    c1 = cgo_layers(profiles.mat1, pp, 1, amp1, cell, tol, q1)
    c2 = cgo_layers(profiles.mat2.conjugated(), pp, 2, amp2, cell, tol, q2)
    return c1, c2


def _potentials(profiles: TwoProfiles, cell: PeriodicCell):
    return potential_on_cell(profiles.mat1, cell), potential_on_cell(profiles.mat2.conjugated(), cell)


def fourier_weight(xi, cell: PeriodicCell) -> np.ndarray:
    return np.exp(1j * np.tensordot(np.asarray(xi, float), cell.points(), axes=(0, 0)))


def ibp_closure(profiles: TwoProfiles, c1: CGOLayers, c2: CGOLayers, mask=None) -> dict:
    """Integration-by-parts closure on numerical CGO fields.

    ``defect`` is int diag(mu~, gamma~) Y1 . conj(Y2) - int U Z1 . conj(Y2);
    it equals ``predicted`` = int diag(gamma~, mu~) Z1 . conj(r2), where r2 is
    the residual of (P(i grad) - W2) Y2, and is bounded by ``budget``.
    """
    cell = c1.cell
    pts = cell.points()
    c = profiles.contrast(pts)
    e = fourier_weight(c1.phase.xi, cell)
    if mask is not None:
        e = np.where(mask, e, 0.0)
    vol = cell.cell_volume
    y1, y2, z1 = c1.y_values, c2.y_values, c1.z
    first = np.sum(e * bilinear(diag_apply(c["mu_tilde"], c["gamma_tilde"], y1), y2)) * vol
    u_term = np.sum(e * bilinear(matvec(u_from_contrast(c), z1), y2)) * vol
    dz = diag_apply(c["gamma_tilde"], c["mu_tilde"], z1)
    r2 = c2.y_residual_field
    predicted = np.sum(e * bilinear(dz, r2)) * vol
    weight = np.abs(e)
    budget = np.sqrt(np.sum(weight * np.abs(dz) ** 2) * vol) * np.sqrt(np.sum(weight * np.abs(r2) ** 2) * vol)
    return dict(first=complex(first), u_term=complex(u_term), defect=complex(first - u_term),
                predicted=complex(predicted), budget=float(budget))


# ---------------------------------------------------------------------------
# limit terms


def _limit_formulas(profiles: TwoProfiles, pp: PhasePair, amp1: AmplitudeSpec, amp2: AmplitudeSpec,
                    cell: PeriodicCell, r1=None, grad_r1=None, r2=None, grad_r2=None, mask=None) -> dict:
    """Limit expressions of the first three terms by direct quadrature.

    ``r1`` is the surrogate of lim tau Z1_{-1}; ``r2`` that of lim tau Z2_{-1}
    (its conjugate enters). Terms needing a missing surrogate are omitted.
    """
    pts = cell.points()
    c = profiles.contrast(pts)
    w, k = profiles.omega, profiles.k
    zh = pp.limit1
    nd = pts.ndim - 1
    zb = _bcast(zh, nd)
    e = fourier_weight(pp.xi, cell)
    if mask is not None:
        e = np.where(mask, e, 0.0)
    vol = cell.cell_volume

    def integral(f):
        return complex(np.sum(e * f) * vol)

    a1, b1 = amp1.a, amp1.b
    a2c, b2c = np.conj(amp2.a), np.conj(amp2.b)
    za1, zb1, za2, zb2 = zh @ a1, zh @ b1, zh @ a2c, zh @ b2c
    k1, k2 = c["kappa1"], c["kappa2"]
    mt, gt = c["mu_tilde"], c["gamma_tilde"]
    mix_g = k2 * gt + k1 * mt
    mix_m = k2 * mt + k1 * gt

    ones = np.ones(pts.shape[1:])
    out = {}
    out["lim1"] = (
        -k * (zb2 * zb1 + za2 * za1) * integral((k1 + k2) * (mt + gt))
        + w * zb2 * zb1 * integral(-c["lap_v"]) + w * za2 * za1 * integral(-c["lap_u"])
        + 2 * k * w * integral(1j * zb2 * _dot(_bcast(np.cross(zh, a1), nd), c["grad_inv_v"])
                               - 1j * za2 * _dot(_bcast(np.cross(zh, b1), nd), c["grad_inv_u"]))
        + 2 * k * w * integral(1j * zb1 * _dot(_bcast(np.cross(zh, a2c), nd), c["grad_v"])
                               - 1j * za1 * _dot(_bcast(np.cross(zh, b2c), nd), c["grad_u"])))
    if r2 is not None:
        rh = np.conj(r2)
        grh = np.conj(grad_r2)
        r22, r24 = rh[1:4], rh[5:8]
        zr24, zr22 = _dot(zb, r24), _dot(zb, r22)
        out["lim2"] = (
            integral(k2 * (za2 * za1 * mix_g + zb2 * zb1 * mix_m))
            - w * integral(za2 * za1 * _dot(c["alpha2"], c["grad_u"]) + zb2 * zb1 * _dot(c["beta2"], c["grad_v"]))
            - integral(zr24 * za1 * mix_g + zr22 * zb1 * mix_m)
            - 2j * w * integral(zb1 * _dot(np.cross(r24, zb * ones, axis=0), c["grad_v"])
                                - za1 * _dot(np.cross(r22, zb * ones, axis=0), c["grad_u"]))
            + 2j * w * integral(zb1 * _dot(zb, grh[:, 4]) * (c["v"] - 1) + za1 * _dot(zb, grh[:, 0]) * (c["u"] - 1)))
    if r1 is not None:
        r12, r14 = r1[1:4], r1[5:8]
        out["lim3"] = (
            -integral(zb2 * _dot(zb, r12) * mix_g + za2 * _dot(zb, r14) * mix_m)
            - 2j * w * integral(za2 * _dot(np.cross(zb * ones, r12, axis=0), c["grad_inv_u"])
                                - zb2 * _dot(np.cross(zb * ones, r14, axis=0), c["grad_inv_v"]))
            + 2j * w * integral(zb2 * _dot(zb, grad_r1[:, 4]) * (c["v"] - 1)
                                + za2 * _dot(zb, grad_r1[:, 0]) * (c["u"] - 1)))
    out["lim4"] = 0.0j
    return out


def _reflected(values, cell: PeriodicCell, height: float):
    """S v(Rx) across the plane x3 = height; zero where the mirror point is not sampled."""
    jp = mirror_indices(cell.axes()[2], height)
    ok = jp >= 0
    out = np.zeros_like(values)
    out[..., ok] = values[..., jp[ok]]
    return REFLECTION_SIGNS.reshape((8,) + (1,) * (values.ndim - 1)) * out, ok


def slab_mask(cell: PeriodicCell, L: float) -> np.ndarray:
    x3 = cell.points()[2]
    return (x3 > 0) & (x3 < L)


def finite_tau_terms(profiles: TwoProfiles, c1: CGOLayers, c2: CGOLayers, mask=None,
                     include_reflected: bool = True) -> dict:
    """The four finite-tau integrals whose limits are the lim1..lim4 formulas."""
    cell = c1.cell
    pts = cell.points()
    u = assemble_U(profiles, pts)
    e = fourier_weight(c1.phase.xi, cell)
    if mask is not None:
        e = np.where(mask, e, 0.0)
    vol = cell.cell_volume
    y21, y20 = c2.layers()
    uz0 = np.einsum("ij...,j->i...", u, c1.z0)
    out = dict(lim1=complex(np.sum(e * bilinear(uz0, y21)) * vol),
               lim2=complex(np.sum(e * bilinear(uz0, y20)) * vol),
               lim3=complex(np.sum(e * bilinear(matvec(u, c1.z_minus1), y21)) * vol))
    if include_reflected:
        y2r, _ = _reflected(c2.y_values, cell, 0.0)
        out["lim4"] = oscillatory_integral(bilinear(matvec(u, c1.z), y2r), _linear_exponent(c1.phase), cell)
    return out


def _linear_exponent(pp: PhasePair) -> np.ndarray:
    """c with i zeta1 . x + conj(i zeta2) . Rx = c . x for the reflection across x3 = 0."""
    return 1j * pp.zeta1 + np.conj(1j * pp.zeta2) * np.array([1.0, 1.0, -1.0])


def oscillatory_integral(g, c, cell: PeriodicCell, points_per_period: int = 8) -> complex:
    """int exp(c . x) g(x) dx for g compactly supported in the cell.

    The transverse sum is taken on the grid; the x3 profile is then Fourier
    resampled until the x3 oscillation has ``points_per_period`` samples, so
    a rapidly oscillating exponent is not aliased onto the smooth part.
    """
    x1, x2, x3 = cell.axes()
    h1, h2, h3 = cell.spacing
    transverse = np.exp(c[0] * x1)[:, None] * np.exp(c[1] * x2)[None, :]
    profile = np.einsum("ij,ij...->...", transverse, g) * h1 * h2
    wavelength = 2 * np.pi / max(abs(c[2].imag), 1e-300)
    factor = max(1, int(2 ** np.ceil(np.log2(max(1.0, points_per_period * h3 / wavelength)))))
    if factor > 1:
        profile = resample(profile, factor * x3.size)
    fine = x3[0] + (h3 / factor) * np.arange(profile.size)
    return complex(np.sum(profile * np.exp(c[2] * fine)) * h3 / factor)


def direct_integrands(profiles: TwoProfiles, cell: PeriodicCell, xi, mask_L: float | None = None,
                      refine: int = 4, chunk: int = 16) -> dict:
    """Fourier integrals of the beta and alpha integrands by direct quadrature.

    The integrands hold second derivatives of the profiles, so they are summed
    on a grid ``refine`` times finer than the cell, ``chunk`` x1-planes at a
    time. ``mask_L`` restricts the integral to the slab 0 < x3 < L.
    """
    fine = PeriodicCell(cell.side, cell.n * refine, cell.center, cell.offset_fraction)
    x1, x2, x3 = fine.axes()
    xi = np.asarray(xi, float)
    total = dict(beta=0.0j, alpha=0.0j)
    for start in range(0, x1.size, chunk):
        pts = np.array(np.meshgrid(x1[start:start + chunk], x2, x3, indexing="ij"))
        c = profiles.contrast(pts)
        e = np.exp(1j * np.tensordot(xi, pts, axes=(0, 0)))
        if mask_L is not None:
            e = np.where((pts[2] > 0) & (pts[2] < mask_L), e, 0.0)
        kk = c["kappa1"] ** 2 - c["kappa2"] ** 2
        for name, key in (("beta", "beta"), ("alpha", "alpha")):
            f = (0.5 * (c[f"div_{key}2"] - c[f"div_{key}1"])
                 + 0.25 * (_dot(c[f"{key}2"], c[f"{key}2"]) - _dot(c[f"{key}1"], c[f"{key}1"])) + kk)
            total[name] += complex(np.sum(e * f))
    return {name: v * fine.cell_volume for name, v in total.items()}


@dataclass
class ConvergenceTable:
    """Rows (tau, term, finite, limit, abs_diff) of a tau sweep."""

    rows: list
    meta: dict = field(default_factory=dict)

    def select(self, term: str) -> list:
        return [r for r in self.rows if r["term"] == term]

    def series(self, term: str, key: str = "abs_diff") -> np.ndarray:
        return np.array([r[key] for r in self.select(term)])

    def tail_decreasing(self, term: str, key: str = "abs_diff", doublings: int = 3) -> bool:
        s = self.series(term, key)[-(doublings + 1):]
        return bool(len(s) >= 2 and np.all(np.diff(s) < 0))


def _check_taus(tau_list):
    taus = [float(t) for t in tau_list]
    if not taus:
        raise ValueError("tau list is empty: no corrector data to evaluate")
    if any(b <= a for a, b in zip(taus, taus[1:])):
        raise ValueError("tau list must be strictly increasing")
    return taus


def limit_sweep(profiles: TwoProfiles, xi, scenario: str, tau_list, cell: PeriodicCell,
                choice: str = "beta", L: float = 1.0, tol: float = 1e-10) -> ConvergenceTable:
    """Finite-tau values and limit formulas of all limit terms over a tau sweep.

    The corrector limits entering the lim2 and lim3 formulas are replaced by
    tau Z_{-1} at the largest tau; the residual of their transport equation
    is stored in ``meta`` as the size of that substitution error.
    """
    taus = _check_taus(tau_list)
    opposite = scenario.startswith("opp")
    mask = slab_mask(cell, L) if opposite else None
    if not opposite:
        for mat, name in ((profiles.mat1, "mat1"), (profiles.mat2, "mat2")):
            ok, mismatch = check_parameter_symmetry(mat, "gamma2", L)
            if not ok:
                raise ValueError(f"{name} is not invariant under reflection across x3 = 0 (mismatch {mismatch:.2e})")
    pots = _potentials(profiles, cell)
    finite = []
    last = None
    for tau in taus:
        pp = build_phase(xi, tau, profiles.k, scenario)
        c1, c2 = cgo_pair(profiles, pp, cell, choice, tol=tol, potentials=pots)
        finite.append((pp, finite_tau_terms(profiles, c1, c2, mask, include_reflected=not opposite)))
        last = (pp, c1, c2)
    pp, c1, c2 = last
    amp1, amp2 = canonical_amplitudes(pp, choice)
    limits = _limit_formulas(profiles, pp, amp1, amp2, cell, r1=c1.r_surrogate(), grad_r1=c1.r_gradient(),
                             r2=c2.r_surrogate(), grad_r2=c2.r_gradient(), mask=mask)
    rows = []
    for p, vals in finite:
        for term, v in vals.items():
            lim = limits[term]
            rows.append(dict(tau=p.tau, term=term, finite=v, limit=lim, abs_diff=abs(v - lim)))
    meta = dict(scenario=scenario, choice=choice)
    for c, lim, q in ((c1, pp.limit1, pots[0]), (c2, pp.limit2, pots[1])):
        z0_lim = pack(lim @ c.amplitude.a, 0.0, lim @ c.amplitude.b, 0.0)
        meta[f"limR_residual_{c.which}"] = limit_R_residual(c.corrector, q, lim, z0_lim, pp.tau)[0]
    return ConvergenceTable(rows, meta)


def limit_term_convergence(profiles: TwoProfiles, xi, scenario: str, tau_list, which: str,
                           cell: PeriodicCell, choice: str = "beta", L: float = 1.0) -> ConvergenceTable:
    """Convergence table of one limit term (lim1, lim2, lim3 or lim4)."""
    if which not in TERMS:
        raise ValueError(f"unknown term {which!r}; expected one of {TERMS}")
    if which == "lim4" and scenario.startswith("opp"):
        raise ValueError("lim4 is a same-plane term; use opp_cross_term_decay for opposite planes")
    table = limit_sweep(profiles, xi, scenario, tau_list, cell, choice, L)
    return ConvergenceTable(table.select(which), table.meta)


def canonical_amplitude_runs(profiles: TwoProfiles, xi, scenario: str, tau_list, cell: PeriodicCell,
                             L: float = 1.0, tol: float = 1e-10) -> ConvergenceTable:
    """Finite-tau int diag(mu~, gamma~) Y1 . conj(Y2) / (4 omega) for both canonical choices.

    With the ``beta`` choice the limit is the Fourier integral of
    (1/2) div(beta2 - beta1) + (beta2.beta2 - beta1.beta1)/4 + kappa1^2 - kappa2^2;
    ``alpha`` gives the same expression in alpha. Each row holds the finite
    value, the directly quadratured integrand of its own choice (``limit``)
    and that of the other choice (``other``).
    """
    taus = _check_taus(tau_list)
    opposite = scenario.startswith("opp")
    mask = slab_mask(cell, L) if opposite else None
    direct = direct_integrands(profiles, cell, xi, L if opposite else None)
    pots = _potentials(profiles, cell)
    pts = cell.points()
    c = profiles.contrast(pts)
    e = fourier_weight(xi, cell)
    if mask is not None:
        e = np.where(mask, e, 0.0)
    rows = []
    for choice, other in (("beta", "alpha"), ("alpha", "beta")):
        for tau in taus:
            pp = build_phase(xi, tau, profiles.k, scenario)
            c1, c2 = cgo_pair(profiles, pp, cell, choice, tol=tol, potentials=pots)
            t1 = np.sum(e * bilinear(diag_apply(c["mu_tilde"], c["gamma_tilde"], c1.y_values), c2.y_values))
            val = complex(t1 * cell.cell_volume / (4 * profiles.omega))
            rows.append(dict(tau=tau, term=choice, finite=val, limit=direct[choice], other=direct[other],
                             abs_diff=abs(val - direct[choice])))
    return ConvergenceTable(rows, dict(scenario=scenario, direct=direct))


# ---------------------------------------------------------------------------
# opposite-plane cross terms


def opp_cross_term_decay(profiles: TwoProfiles, xi, tau_list, cell: PeriodicCell, L: float = 1.0,
                         choice: str = "beta", tol: float = 1e-10) -> list:
    """Magnitudes of the three cross terms over a tau sweep.

    term2 = int U Z1 . conj(Y2 reflected across x3 = L),
    term3 = int diag(mu~, gamma~) (Y1 reflected across x3 = 0) . conj(Y2),
    term4 = int diag(mu~, gamma~) (Y1 reflected) . conj(Y2 reflected),
    all over the slab part of the cell. ``bound4`` is |term4| / (tau e^{Re phi4}).
    """
    taus = _check_taus(tau_list)
    mask = slab_mask(cell, L)
    pts = cell.points()
    c = profiles.contrast(pts)
    u = u_from_contrast(c)
    pots = _potentials(profiles, cell)
    vol = cell.cell_volume
    rows = []
    for tau in taus:
        pp = build_phase(xi, tau, profiles.k, "opposite")
        c1, c2 = cgo_pair(profiles, pp, cell, choice, tol=tol, potentials=pots)
        y1r, _ = _reflected(c1.y_values, cell, 0.0)
        y2r, _ = _reflected(c2.y_values, cell, L)
        e2, e3, e4 = (np.where(mask, np.exp(exponent_phi(j, pts, pp, L)), 0.0) for j in (2, 3, 4))
        td_y1r = diag_apply(c["mu_tilde"], c["gamma_tilde"], y1r)
        t2 = complex(np.sum(e2 * bilinear(matvec(u, c1.z), y2r)) * vol)
        t3 = complex(np.sum(e3 * bilinear(td_y1r, c2.y_values)) * vol)
        t4 = complex(np.sum(e4 * bilinear(td_y1r, y2r)) * vol)
        scale4 = tau * np.exp(np.real(exponent_phi(4, np.zeros(3), pp, L)))
        rows.append(dict(tau=tau, term2=abs(t2), term3=abs(t3), term4=abs(t4), bound4=abs(t4) / scale4))
    return rows


# ---------------------------------------------------------------------------
# the derived PDE system


@dataclass
class PDEResidual:
    r_v: np.ndarray
    r_u: np.ndarray
    boundary: dict

    @property
    def max_interior(self) -> float:
        return float(max(np.max(np.abs(self.r_v)), np.max(np.abs(self.r_u))))


def pde_residual(profiles: TwoProfiles, u, v, points, spacing) -> PDEResidual:
    """Residuals of -div(mu2 grad v) + w^2 mu2^2 gamma2 (u^2 v^2 - 1) v and its u analogue.

    ``u`` and ``v`` are samples on the node grid ``points``; derivatives are
    fourth-order differences. Boundary residuals are u - 1, v - 1 and the
    normal derivatives on the outer faces of the grid.
    """
    points = np.asarray(points, dtype=float)
    u = np.asarray(u, dtype=complex)
    v = np.asarray(v, dtype=complex)
    w = profiles.omega
    mu2 = profiles.mat2.mu(points)
    g2 = profiles.mat2.gamma(points)
    gv, gu = fd4_gradient(v, spacing), fd4_gradient(u, spacing)

    def div(f):
        return sum(fd4_gradient(f[i], spacing)[i] for i in range(3))

    s = u ** 2 * v ** 2 - 1.0
    r_v = -div(mu2 * gv) + w ** 2 * mu2 ** 2 * g2 * s * v
    r_u = -div(g2 * gu) + w ** 2 * mu2 * g2 ** 2 * s * u
    boundary = dict(value=0.0, normal_derivative=0.0)
    for axis in range(3):
        for idx in (0, -1):
            sl = [slice(None)] * 3
            sl[axis] = idx
            sl = tuple(sl)
            boundary["value"] = max(boundary["value"], float(np.max(np.abs(u[sl] - 1))), float(np.max(np.abs(v[sl] - 1))))
            boundary["normal_derivative"] = max(boundary["normal_derivative"], float(np.max(np.abs(gu[axis][sl]))),
                                                float(np.max(np.abs(gv[axis][sl]))))
    return PDEResidual(r_v, r_u, boundary)


def log_form(profiles: TwoProfiles, x) -> tuple:
    """The two log-form equations for (mu, gamma), evaluated analytically."""
    c = profiles.contrast(np.asarray(x, dtype=float))
    w = profiles.omega
    pot = w ** 2 * (c["mu1"] * c["gamma1"] - c["mu2"] * c["gamma2"])
    eq_mu = (-0.5 * (c["div_beta1"] - c["div_beta2"])
             - 0.25 * _dot(c["beta1"] + c["beta2"], c["beta1"] - c["beta2"]) + pot)
    eq_gamma = (-0.5 * (c["div_alpha1"] - c["div_alpha2"])
                - 0.25 * _dot(c["alpha1"] + c["alpha2"], c["alpha1"] - c["alpha2"]) + pot)
    return eq_mu, eq_gamma


def divergence_form(profiles: TwoProfiles, x) -> tuple:
    """The divergence-form residuals at u = (gamma1/gamma2)^1/2, v = (mu1/mu2)^1/2.

    Derivatives come from the quotient rule on the raw parameter jets, not from
    the logarithmic derivatives used by :func:`log_form`.
    """
    x = np.asarray(x, dtype=float)
    w = profiles.omega
    out = {}
    for name, jet in (("v", "mu_jet"), ("u", "gamma_jet")):
        p1, d1, h1 = getattr(profiles.mat1, jet)(x)
        p2, d2, h2 = getattr(profiles.mat2, jet)(x)
        q = p1 / p2
        gq = (d1 - q * d2) / p2
        lap1, lap2 = np.einsum("ii...->...", h1), np.einsum("ii...->...", h2)
        lq = (lap1 - q * lap2 - 2 * _dot(gq, d2)) / p2
        s = np.sqrt(q)
        gs = gq / (2 * s)
        ls = lq / (2 * s) - _dot(gq, gq) / (4 * s ** 3)
        out[name] = (s, gs, ls)
    mu2, dmu2, _ = profiles.mat2.mu_jet(x, 1)
    g2, dg2, _ = profiles.mat2.gamma_jet(x, 1)
    (v, gv, lv), (u, gu, lu) = out["v"], out["u"]
    s = u ** 2 * v ** 2 - 1.0
    r_v = -(mu2 * lv + _dot(dmu2, gv)) + w ** 2 * mu2 ** 2 * g2 * s * v
    r_u = -(g2 * lu + _dot(dg2, gu)) + w ** 2 * mu2 * g2 ** 2 * s * u
    return r_v, r_u


def pde_equivalence(profiles: TwoProfiles, x) -> float:
    """Max |(mu1 mu2)^1/2 E_mu - r_v| and |(gamma1 gamma2)^1/2 E_gamma - r_u|."""
    x = np.asarray(x, dtype=float)
    eq_mu, eq_gamma = log_form(profiles, x)
    r_v, r_u = divergence_form(profiles, x)
    sm = np.sqrt(profiles.mat1.mu(x) * profiles.mat2.mu(x))
    sg = np.sqrt(profiles.mat1.gamma(x) * profiles.mat2.gamma(x))
    return float(max(np.max(np.abs(sm * eq_mu - r_v)), np.max(np.abs(sg * eq_gamma - r_u))))


# ---------------------------------------------------------------------------
# reflection change of variables


def reflection_identity(profiles: TwoProfiles, y1, y2, cell: PeriodicCell, L: float = 1.0,
                        plane: str = "gamma2") -> tuple:
    """Both sides of int_D diag(mu~, gamma~) Y1' . conj(Y2') = int_D' diag(mu~, gamma~) Y1 . conj(Y2).

    Primes denote reflection across ``plane``; D = {0 < x3 < L} and D' is its
    mirror image. Requires reflection-invariant parameters.
    """
    for mat, name in ((profiles.mat1, "mat1"), (profiles.mat2, "mat2")):
        ok, mismatch = check_parameter_symmetry(mat, plane, L)
        if not ok:
            raise ValueError(f"{name} is not invariant under reflection across {plane} (mismatch {mismatch:.2e})")
    height = 0.0 if plane == "gamma2" else L
    pts = cell.points()
    c = profiles.contrast(pts)
    y1, y2 = _values(y1), _values(y2)
    y1r, ok1 = _reflected(y1, cell, height)
    y2r, _ = _reflected(y2, cell, height)
    x3 = pts[2]
    inside = (x3 > 0) & (x3 < L)
    if plane == "gamma2":
        mirror = (x3 > -L) & (x3 < 0)
    else:
        mirror = (x3 > L) & (x3 < 2 * L)
    vol = cell.cell_volume
    lhs = np.sum(np.where(inside, bilinear(diag_apply(c["mu_tilde"], c["gamma_tilde"], y1r), y2r), 0.0)) * vol
    rhs = np.sum(np.where(mirror, bilinear(diag_apply(c["mu_tilde"], c["gamma_tilde"], y1), y2), 0.0)) * vol
    return complex(lhs), complex(rhs)
