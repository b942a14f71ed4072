import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from slabcgo.fields import GridField
from slabcgo.slab_greens import (ModeSpec, check_radiation, convolve_transverse, hankel_h01, parseval_ratio,
                                 phi_dirichlet, psi_neumann, sine_cosine_expand, sine_cosine_synthesize, slab_axis,
                                 solve_helmholtz_slab, tail_bound)


def _j0_y0_series(x, terms=60):
    """Ascending series of J0 and Y0 for moderate real x."""
    j = y = 0.0
    harmonic = 0.0
    for m in range(terms):
        t = (-1) ** m * (x / 2) ** (2 * m) / math.factorial(m) ** 2
        j += t
        if m > 0:
            harmonic += 1.0 / m
            y -= t * harmonic
    y = 2 / math.pi * ((math.log(x / 2) + np.euler_gamma) * j + y)
    return j, y


@settings(max_examples=30, deadline=None)
@given(x=st.floats(0.05, 8.0))
def test_hankel_against_ascending_series(x):
    j, y = _j0_y0_series(x)
    assert abs(hankel_h01(x) - (j + 1j * y)) <= 1e-11 * max(1.0, abs(j + 1j * y))


def test_hankel_rejects_origin():
    with pytest.raises(ValueError):
        hankel_h01(0.0)


def test_k_m_branch_and_resonance():
    spec = ModeSpec(4.0, 1.0, 5)
    km = spec.k_m(spec.modes)
    assert np.all(km.imag >= 0)
    assert km[0].imag == 0 and km[1].real == 0
    assert spec.propagating.tolist() == [1]
    with pytest.raises(ValueError, match="resonant"):
        ModeSpec(np.pi, 1.0, 5)


def test_kernels_respect_boundary_conditions():
    spec = ModeSpec(2.0, 1.0, 20)
    y = np.array([0.0, 0.0, 0.3])
    for x3 in (0.0, 1.0):
        x = np.array([0.5, 0.2, x3])
        assert abs(phi_dirichlet(x, y, spec)) < 1e-14
    h = 1e-6
    for x3 in (0.0, 1.0):
        xp = np.array([0.5, 0.2, x3 + h])
        xm = np.array([0.5, 0.2, x3 - h])
        assert abs(psi_neumann(xp, y, spec) - psi_neumann(xm, y, spec)) / (2 * h) < 1e-6
    assert tail_bound(0.5, spec) < 1e-5


@settings(max_examples=20, deadline=None)
@given(coeffs=st.lists(st.floats(-1, 1).map(lambda v: round(v, 3)), min_size=3, max_size=6),
       parity=st.sampled_from(["sine", "cosine"]))
def test_transform_round_trip(coeffs, parity):
    n = 16
    c = np.array(coeffs)
    f = sine_cosine_synthesize(c, parity, n)
    back = sine_cosine_expand(f, parity, len(c) - (1 if parity == "cosine" else 0))
    assert np.allclose(back, c, atol=1e-12)
    if np.any(c):
        assert abs(parseval_ratio(f, parity) - 1) < 1e-12


def test_synthesized_derivative():
    x = slab_axis(1.0, 32)
    d = sine_cosine_synthesize(np.array([0.0, 1.0]), "sine", 32, derivative=True)
    assert np.allclose(d, 2 * np.pi * np.cos(2 * np.pi * x))


def test_transverse_convolution_of_point_source():
    # far from a point source the convolution is the kernel itself
    n, h = 32, 0.1
    g = np.zeros((n, n))
    g[n // 2, n // 2] = 1.0 / h ** 2
    u = convolve_transverse(g, 3.0 + 0j, h)
    r = np.hypot(10 * h, 0.0)
    assert np.isclose(u[n // 2 + 10, n // 2], 0.25j * hankel_h01(3.0 * r), rtol=1e-12)


def test_helmholtz_boundary_values():
    n, n3 = 32, 16
    h = 4.0 / n
    x = -2.0 + h * (np.arange(n) + 0.5)
    z = slab_axis(1.0, n3)
    X, Y, Z = np.meshgrid(x, x, z, indexing="ij")
    vals = np.exp(-(X ** 2 + Y ** 2) / 0.3) * np.sin(np.pi * Z) * np.exp(np.cos(2 * np.pi * Z))
    g = GridField(vals[None], (x[0], x[0], 0.0), (h, h, 1.0 / n3))
    spec = ModeSpec(3.0, 1.0, 10)
    for bc in ("dirichlet", "neumann"):
        sol = solve_helmholtz_slab(g, bc, spec)
        assert sol.boundary_residual <= 1e-8
    with pytest.raises(ValueError):
        solve_helmholtz_slab(g, "robin", spec)
    bad = GridField(vals[None], (x[0], x[0], 0.1), (h, h, 1.0 / n3))
    with pytest.raises(ValueError, match="span the slab"):
        solve_helmholtz_slab(bad, "dirichlet", spec)


def test_radiation_check_separates_outgoing_from_incoming():
    spec = ModeSpec(4.0, 1.0, 3)
    km = spec.k_m(1).real
    r = np.arange(4.0, 12.0)
    out = check_radiation(lambda p: hankel_h01(km * np.hypot(*p)), spec, 1, r)
    inc = check_radiation(lambda p: np.conj(hankel_h01(km * np.hypot(*p))), spec, 1, r)
    assert out.passed and out.slope < -0.8
    assert not inc.passed
    with pytest.raises(ValueError, match="not a propagating"):
        check_radiation(lambda p: p[0], spec, 2, r)
