import numpy as np
import pytest

from slabcgo.cgo_phase import build_phase, build_Z0, canonical_amplitudes
from slabcgo.core_algebra import Bump, MaterialProfile, symbol_P
from slabcgo.faddeev import (build_full_Y, conjugated_multiplier, grid_norm, potential_on_cell, prepare_cell,
                             solve_corrector)
from slabcgo.fields import PeriodicCell, _twist_factor, matvec


@pytest.fixture(scope="module")
def setup():
    mat = MaterialProfile(1.0, 1.0, 1.0, (Bump("gaussian", (0, 0, 0), 0.85, 0.1),),
                          (Bump("gaussian", (0.1, -0.1, 0), 0.85, 0.15 + 0.05j),))
    cell = PeriodicCell(8.0, 16)
    return mat, cell, potential_on_cell(mat, cell)


def _z0(tau):
    pp = build_phase((1.0, 0.5, 0.3), tau, 1.0)
    return pp, build_Z0(pp, canonical_amplitudes(pp, "beta")[0], 1)


def test_multiplier_inverts_symbol():
    cell = PeriodicCell(8.0, 16)
    zeta = build_phase((1.0, 0.5, 0.3), 8.0, 1.0).zeta1
    m = conjugated_multiplier(zeta, cell)
    kap = cell.dual_lattice()
    sym = np.sum(kap * kap, axis=0) + 2 * np.einsum("i,i...->...", zeta, kap)
    assert np.allclose(m.values * sym, 1.0)
    assert m.min_denominator > 0


def test_characteristic_set_hit_is_reported():
    # without the lattice shift kappa = 0 lies on the characteristic set
    cell = PeriodicCell(8.0, 16, offset_fraction=0.0)
    with pytest.raises(ValueError, match="characteristic set"):
        conjugated_multiplier(np.array([0, 1j, 1.0]) * 4, cell)
    with pytest.raises(ValueError):
        prepare_cell(np.array([0, 1j, 1.0]) * 4, cell)


def test_constant_profile_gives_zero_corrector():
    mat = MaterialProfile(1.0)
    cell = PeriodicCell(8.0, 16)
    pp, z0 = _z0(8.0)
    res = solve_corrector(potential_on_cell(mat, cell), pp.zeta1, z0, cell)
    assert res.iterations == 0 and np.all(res.psi.values == 0)


def test_corrector_solves_the_conjugated_equation(setup):
    mat, cell, q = setup
    pp, z0 = _z0(16.0)
    res = solve_corrector(q, pp.zeta1, z0, cell, tol=1e-10)
    assert res.converged and res.residual <= 1e-9
    # psi = -m(D) Q (Z0 + psi) checked directly
    twist = _twist_factor(cell.shape, cell.spacing, cell.origin, cell.bloch)
    m = conjugated_multiplier(pp.zeta1, cell)
    psi = np.asarray(res.psi.values)
    full = z0.reshape(8, 1, 1, 1) + psi
    back = -m.apply(matvec(q, full), twist)
    assert grid_norm(back - psi, cell) <= 1e-8 * grid_norm(psi, cell)


def test_born_and_gmres_agree(setup):
    mat, cell, q = setup
    pp, z0 = _z0(32.0)
    a = solve_corrector(q, pp.zeta1, z0, cell, tol=1e-10, method="gmres")
    b = solve_corrector(q, pp.zeta1, z0, cell, tol=1e-10, method="born")
    diff = grid_norm(a.psi.values - b.psi.values, cell)
    assert diff <= 1e-8 * grid_norm(a.psi.values, cell)
    with pytest.raises(ValueError):
        solve_corrector(q, pp.zeta1, z0, cell, method="jacobi")


def test_corrector_norm_decreases_with_tau(setup):
    mat, cell, q = setup
    norms = []
    for tau in (8.0, 16.0, 32.0):
        pp, z0 = _z0(tau)
        norms.append(grid_norm(solve_corrector(q, pp.zeta1, z0, cell).psi.values, cell))
    assert norms[0] > norms[1] > norms[2]


def test_background_Y_satisfies_stripped_system():
    mat = MaterialProfile(1.0)
    cell = PeriodicCell(8.0, 16)
    pp, z0 = _z0(8.0)
    res = solve_corrector(potential_on_cell(mat, cell), pp.zeta1, z0, cell)
    y, rel = build_full_Y(res, pp.zeta1, z0, mat)
    assert rel <= 1e-12
    expected = -symbol_P(pp.zeta1, z0) + mat.k * z0
    assert np.allclose(np.asarray(y.values)[:, 0, 0, 0], expected)


def test_support_must_fit_in_cell():
    mat = MaterialProfile(1.0, 1.0, 1.0, (Bump("gaussian", (0, 0, 0), 1.0, 0.1),))
    with pytest.raises(ValueError, match="strictly inside"):
        potential_on_cell(mat, PeriodicCell(4.0, 16))
