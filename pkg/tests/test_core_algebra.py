import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from slabcgo.core_algebra import (Bump, MaterialProfile, apply_P_grid, assemble_Q, assemble_Qtilde,
                                  assemble_V, assemble_W, check_factorization, profile_from_config,
                                  rescale, symbol_matrix, symbol_P)
from slabcgo.fields import PeriodicCell

finite = st.floats(-2.0, 2.0, allow_nan=False)


def _profile():
    return MaterialProfile(1.0, 1.0, 1.0, (Bump("gaussian", (0, 0, 0), 0.85, 0.1),),
                           (Bump("poly", (0.1, -0.1, 0), 1.2, 0.15 + 0.05j),))


@settings(max_examples=25, deadline=None)
@given(kind=st.sampled_from(["gaussian", "poly"]), c=st.tuples(finite, finite, finite),
       r=st.floats(0.5, 2.0), x=st.tuples(finite, finite, finite))
def test_bump_derivatives_match_central_differences(kind, c, r, x):
    b = Bump(kind, c, r, 1.0 + 0.5j)
    x = np.array(x, float)
    h = 1e-5
    _, grad, hess = b.evaluate(x)
    for i in range(3):
        e = np.zeros(3)
        e[i] = h
        vp, gp, _ = b.evaluate(x + e)
        vm, gm, _ = b.evaluate(x - e)
        assert abs((vp - vm) / (2 * h) - grad[i]) <= 1e-6 * max(1.0, abs(grad[i]))
        assert np.allclose((gp - gm) / (2 * h), hess[:, i], atol=1e-5)


@settings(max_examples=30, deadline=None)
@given(re=st.tuples(finite, finite, finite), im=st.tuples(finite, finite, finite))
def test_symbol_squares_to_zeta_dot_zeta(re, im):
    z = np.array(re) + 1j * np.array(im)
    p = symbol_matrix(z)
    assert np.allclose(p @ p, (z @ z) * np.eye(8), atol=1e-12)
    u = np.arange(8) + 1j
    assert np.allclose(symbol_P(z, u), p @ u)


def test_constant_profile_potentials_are_multiples_of_identity():
    mat = MaterialProfile(2.0)
    x = np.random.default_rng(0).normal(size=(3, 5))
    eye = np.eye(8)[..., None]
    assert np.allclose(assemble_W(mat, x), mat.k * eye)
    assert np.allclose(assemble_Qtilde(mat, x), -mat.k ** 2 * eye)
    assert np.allclose(assemble_Q(mat, x), 0)
    v = assemble_V(mat, x)
    assert v.shape == (8, 8, 5)


def test_potentials_are_background_outside_support():
    mat = MaterialProfile(1.0, 1.0, 1.0, (Bump("poly", (0, 0, 0), 0.5, 0.1),), (Bump("poly", (0, 0, 0), 0.5, 0.2j),))
    x = np.array([[0.6, 0.0], [0.0, 0.7], [0.0, 0.0]])
    assert np.allclose(assemble_W(mat, x), mat.k * np.eye(8)[..., None])
    assert np.allclose(assemble_Q(mat, x), 0)


def test_constant_factorization_is_exact():
    rep = check_factorization(MaterialProfile(1.0), PeriodicCell(8.0, 16), count=2)
    assert rep.max_rel_residual <= 1e-10


def test_factorization_converges_spectrally():
    mat = _profile()
    coarse = check_factorization(mat, PeriodicCell(8.0, 16), count=2)
    fine = check_factorization(mat, PeriodicCell(8.0, 32), count=2)
    assert fine.max_rel_residual < coarse.max_rel_residual / 10
    assert set(fine.per_block_residuals) == {"phi", "h", "psi", "e"}
    assert '"backend": "spectral"' in fine.to_json()


def test_factorization_rejects_support_outside_cell():
    with pytest.raises(ValueError, match="inside the periodic cell"):
        check_factorization(_profile(), PeriodicCell(4.0, 16))


def test_rescale_round_trip():
    mat = _profile()
    x = np.random.default_rng(1).normal(size=(3, 4))
    u = np.random.default_rng(2).normal(size=(8, 4)) + 0j
    y = rescale(u, mat, x)
    assert np.allclose(rescale(y, mat, x, "inverse"), u)
    with pytest.raises(ValueError):
        rescale(u, mat, x, "sideways")


def test_profile_validation():
    with pytest.raises(ValueError, match="unknown bump kind"):
        Bump("box", (0, 0, 0), 1.0, 1.0)
    with pytest.raises(ValueError, match="positive real part"):
        MaterialProfile(1.0, 1.0, 1.0, (Bump("gaussian", (0, 0, 0), 1.0, -2.0),))
    with pytest.raises(ValueError, match="resonance"):
        MaterialProfile(np.pi).check_nonresonant(1.0)


def test_profile_from_config():
    mat = profile_from_config(dict(omega="2", mu_bump="gaussian", mu_center="0,0,0.5", mu_radius="0.3",
                                   mu_amplitude="0.1", gamma_bumps="poly:0,0,0.5:0.4:0.2+0.1j"))
    assert mat.omega == 2.0 and len(mat.mu_bumps) == 1 and len(mat.gamma_bumps) == 1
    assert mat.gamma_bumps[0].amplitude == 0.2 + 0.1j


def test_conjugated_profile_flips_gamma_imaginary_part():
    mat = _profile()
    x = np.zeros((3, 1))
    assert np.allclose(mat.conjugated().gamma(x), np.conj(mat.gamma(x)))
    assert np.allclose(mat.conjugated().mu(x), mat.mu(x))


def test_apply_P_grid_rejects_coarse_grid():
    cell = PeriodicCell(8.0, 16)
    f = cell.grid_field(np.zeros((8,) + cell.shape, complex), twisted=False)
    with pytest.raises(ValueError, match="too coarse"):
        apply_P_grid(f, wavelength=1.0)
    out = apply_P_grid(f, wavelength=10.0)
    assert out.meta["backend"] == "spectral"
