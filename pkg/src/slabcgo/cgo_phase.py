"""Complex phase vectors, leading CGO amplitudes and reflected exponents.

Two families are built from a real frequency xi and a size parameter tau:
``same`` (both CGOs refer to one reflection plane) and ``opposite`` (the
planes x3 = 0 and x3 = L). In both cases zeta_j . zeta_j = k^2 and
i zeta_1 + conj(i zeta_2) = i xi, so the product of the two exponentials is
the plain Fourier weight exp(i xi . x).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core_algebra import MaterialProfile, assemble_W, symbol_P
from .fields import matvec, pack, transpose

SCENARIOS = ("same", "opposite")
_ALIASES = {"same": "same", "same-plane": "same", "opp": "opposite",
            "opposite": "opposite", "opposite-plane": "opposite"}


def normalize_scenario(name: str) -> str:
    try:
        return _ALIASES[name.strip().lower()]
    except KeyError:
        raise ValueError(f"unknown scenario {name!r}; expected same or opposite") from None


def build_frame(xi):
    """Unit vectors eta1, eta2 orthogonal to xi and the frame (f1, f2, f3)."""
    xi = np.asarray(xi, dtype=float)
    rp = np.hypot(xi[0], xi[1])
    r = np.linalg.norm(xi)
    if rp == 0:
        raise ValueError("xi must have a nonzero transverse part (xi1, xi2)")
    eta1 = np.array([xi[1], -xi[0], 0.0]) / rp
    eta2 = np.array([-xi[0] * xi[2], -xi[1] * xi[2], rp ** 2]) / (rp * r)
    f2 = np.array([xi[0], xi[1], 0.0]) / rp
    f3 = np.array([0.0, 0.0, 1.0])
    f1 = np.cross(f2, f3)
    return eta1, eta2, (f1, f2, f3)


@dataclass(frozen=True)
class PhasePair:
    xi: np.ndarray
    tau: float
    k: float
    scenario: str
    eta1: np.ndarray
    eta2: np.ndarray
    f_frame: tuple
    zeta1: np.ndarray
    zeta2: np.ndarray

    @property
    def xi_dot(self) -> np.ndarray:
        return self.xi * np.array([1.0, 1.0, -1.0])

    @property
    def xi_perp(self) -> float:
        return float(np.hypot(self.xi[0], self.xi[1]))

    @property
    def zeta_hat(self) -> np.ndarray:
        return self.eta2 + 1j * self.eta1

    @property
    def zeta_check(self) -> np.ndarray:
        return self.eta2 - 1j * self.eta1

    @property
    def zeta_tilde(self) -> np.ndarray:
        return self.eta1 - 1j * self.eta2

    @property
    def limit1(self) -> np.ndarray:
        """Limit of zeta1 / tau."""
        return self.zeta_hat if self.scenario == "same" else self.zeta_tilde

    @property
    def limit2(self) -> np.ndarray:
        """Limit of zeta2 / tau."""
        return self.zeta_check if self.scenario == "same" else np.conj(self.zeta_tilde)

    @property
    def decay_rate(self) -> float:
        """Rate 2 (tau^2 - k^2)^(1/2) |xi'| / |xi| of the opposite-plane cross terms."""
        return 2 * np.sqrt(self.tau ** 2 - self.k ** 2) * self.xi_perp / np.linalg.norm(self.xi)

    def zeta(self, which: int) -> np.ndarray:
        if which not in (1, 2):
            raise ValueError("which must be 1 or 2")
        return self.zeta1 if which == 1 else self.zeta2

    def with_tau(self, tau: float) -> "PhasePair":
        return build_phase(self.xi, tau, self.k, self.scenario)

    def invariant_errors(self) -> dict:
        # rounding in zeta.zeta is of size eps |zeta|^2 ~ eps tau^2, so the
        # error is measured on that scale
        k2 = self.k ** 2
        scale = lambda z: max(k2, float(np.real(z @ np.conj(z))))
        return dict(
            zeta_dot_zeta_err=max(abs(z @ z - k2) / scale(z) for z in (self.zeta1, self.zeta2)),
            sum_err=float(np.max(np.abs(1j * self.zeta1 + np.conj(1j * self.zeta2) - 1j * self.xi)))
            / max(1.0, np.linalg.norm(self.xi)),
        )


def build_phase(xi, tau: float, k: float, scenario: str = "same") -> PhasePair:
    scenario = normalize_scenario(scenario)
    xi = np.asarray(xi, dtype=float)
    if k <= 0:
        raise ValueError("k must be positive")
    eta1, eta2, frame = build_frame(xi)
    x2 = float(xi @ xi)
    if scenario == "same":
        a = np.sqrt(tau ** 2 + x2 / 4)
        b = np.sqrt(tau ** 2 + k ** 2)
        z1 = xi / 2 + 1j * a * eta1 + b * eta2
        z2 = -xi / 2 - 1j * a * eta1 + b * eta2
    else:
        if tau <= max(k, np.sqrt(x2) / 2):
            raise ValueError(f"opposite-plane phases need tau > max(k, |xi|/2) = {max(k, np.sqrt(x2) / 2)}")
        a = np.sqrt(tau ** 2 - x2 / 4)
        b = np.sqrt(tau ** 2 - k ** 2)
        z1 = xi / 2 + a * eta1 - 1j * b * eta2
        z2 = -xi / 2 + a * eta1 + 1j * b * eta2
    return PhasePair(xi, float(tau), float(k), scenario, eta1, eta2, frame,
                     z1.astype(complex), z2.astype(complex))


@dataclass(frozen=True)
class AmplitudeSpec:
    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "a", np.asarray(self.a, dtype=complex))
        object.__setattr__(self, "b", np.asarray(self.b, dtype=complex))


def canonical_amplitudes(pp: PhasePair, choice: str) -> tuple:
    """Amplitude pairs (for zeta1, for zeta2) of the canonical runs.

    ``beta`` selects b1 = conj(b2) = zeta_check with a on zeta_hat, ``alpha``
    swaps the roles; for opposite planes the analogous tilde choices are used.
    """
    if pp.scenario == "same":
        u, w = pp.zeta_hat, pp.zeta_check
    else:
        u, w = pp.zeta_tilde, np.conj(pp.zeta_tilde)
    if choice == "beta":
        a, b = u, w
    elif choice == "alpha":
        a, b = w, u
    else:
        raise ValueError("choice must be 'alpha' or 'beta'")
    return AmplitudeSpec(a, b), AmplitudeSpec(np.conj(a), np.conj(b))


def build_Z0(pp: PhasePair, amp: AmplitudeSpec, which: int = 1) -> np.ndarray:
    """Leading amplitude (zeta.a, k b, zeta.b, k a) / tau."""
    z = pp.zeta(which)
    return pack(z @ amp.a, pp.k * amp.b, z @ amp.b, pp.k * amp.a) / pp.tau


def admissibility_check(z0, pp: PhasePair, which: int = 1, rtol: float = 1e-12):
    """Scalar blocks of (-P(zeta) + k) Z0; they must vanish for admissible Z0."""
    z0 = np.asarray(z0, dtype=complex)
    r = -symbol_P(pp.zeta(which), z0) + pp.k * z0
    res = (abs(r[0]), abs(r[4]))
    scale = np.linalg.norm(z0)
    ok = bool(max(res) <= rtol * max(scale, np.finfo(float).tiny)) or scale == 0
    return ok, res


def leading_Y(z0, z_minus1, pp: PhasePair, mat: MaterialProfile, pos, which: int = 1):
    """The O(tau) layer -P(zeta) Z0 and the O(1) layer -P(zeta) Z_{-1} + W^T Z0."""
    zeta = pp.zeta(which)
    pos = np.asarray(pos, dtype=float)
    z0 = np.asarray(z0, dtype=complex)
    zm1 = np.asarray(z_minus1, dtype=complex)
    extra = pos.ndim - 1
    if extra and z0.ndim == 1:
        z0 = z0.reshape((8,) + (1,) * extra)
    zeta_b = zeta.reshape((3,) + (1,) * max(zm1.ndim - 1, z0.ndim - 1))
    wt = transpose(assemble_W(mat, pos))
    y1 = -symbol_P(zeta_b, z0)
    y0 = -symbol_P(zeta_b, zm1) + matvec(wt, np.broadcast_to(z0, (8,) + pos.shape[1:]))
    return y1, y0


# ---------------------------------------------------------------------------
# exponents of reflected products


def reflect_points(x, plane: str | None, L: float):
    x = np.asarray(x, dtype=float)
    if plane is None:
        return x
    y = np.array(x, copy=True)
    if plane == "gamma2":
        y[2] = -x[2]
    elif plane == "gamma1":
        y[2] = 2 * L - x[2]
    else:
        raise ValueError(f"unknown plane {plane!r}")
    return y


def combined_exponent(pp: PhasePair, x, plane1=None, plane2=None, L: float = 1.0):
    """i zeta1 . R1 x + conj(i zeta2) . R2 x computed from the vectors directly."""
    x = np.asarray(x, dtype=float)
    y1 = reflect_points(x, plane1, L)
    y2 = reflect_points(x, plane2, L)
    return (np.tensordot(1j * pp.zeta1, y1, axes=(0, 0))
            + np.tensordot(np.conj(1j * pp.zeta2), y2, axes=(0, 0)))


# reflections used by each opposite-plane cross term
EXPONENT_PLANES = {2: (None, "gamma1"), 3: ("gamma2", None), 4: ("gamma2", "gamma1")}


def exponent_phi(j: int, x, pp: PhasePair, L: float):
    """Closed-form exponent of the j-th opposite-plane cross term (j = 2, 3, 4)."""
    if pp.scenario != "opposite":
        raise ValueError("exponent_phi is defined for the opposite-plane scenario")
    if j not in EXPONENT_PLANES:
        raise ValueError("j must be 2, 3 or 4")
    x = np.asarray(x, dtype=float)
    xf2 = np.tensordot(pp.f_frame[1], x, axes=(0, 0))
    rate = pp.decay_rate
    if j == 2:
        return 1j * pp.xi_perp * xf2 + 1j * pp.xi[2] * L - rate * (L - x[2])
    if j == 3:
        return 1j * pp.xi_perp * xf2 - rate * x[2]
    return 1j * np.tensordot(pp.xi_dot, x, axes=(0, 0)) + 1j * pp.xi[2] * L - rate * L


def exponent_bound(j: int, x, pp: PhasePair, L: float):
    """|exp(phi_j(x))|."""
    return np.exp(np.real(exponent_phi(j, x, pp, L)))


def exponent_table_row(pp: PhasePair, L: float, n: int = 9) -> dict:
    """Summary row for the CSV exponent table over a grid of slab heights."""
    x3 = np.linspace(0.0, L, n)
    pts = np.array([np.zeros(n), np.zeros(n), x3])
    err = pp.invariant_errors()
    return dict(tau=pp.tau,
                re_phi2_min=float(np.min(np.real(exponent_phi(2, pts, pp, L)))),
                re_phi3_min=float(np.min(np.real(exponent_phi(3, pts, pp, L)))),
                re_phi4=float(np.real(exponent_phi(4, pts[:, 0], pp, L))),
                zeta_dot_zeta_err=float(err["zeta_dot_zeta_err"]),
                sum_err=float(err["sum_err"]))


def tau_sweep(start: float = 2.0, stop: float = 256.0) -> list:
    """Powers of two from start to stop inclusive."""
    out, t = [], float(start)
    while t <= stop * (1 + 1e-12):
        out.append(t)
        t *= 2
    return out


def loglog_slope(x, y):
    """Least-squares slope and R^2 of log y against log x."""
    lx, ly = np.log(np.asarray(x, float)), np.log(np.asarray(y, float))
    a = np.vstack([lx, np.ones_like(lx)]).T
    coef, *_ = np.linalg.lstsq(a, ly, rcond=None)
    pred = a @ coef
    ss_res = float(np.sum((ly - pred) ** 2))
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    return float(coef[0]), (1.0 - ss_res / ss_tot) if ss_tot > 0 else 1.0
