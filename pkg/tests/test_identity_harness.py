import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from slabcgo.cgo_phase import build_phase
from slabcgo.core_algebra import Bump, MaterialProfile
from slabcgo.fields import PeriodicCell
from slabcgo.identity_harness import (ConvergenceTable, TwoProfiles, assemble_U, canonical_amplitude_runs, cgo_pair,
                                      contrast_pair, divergence_form, ibp_closure, integral_identity, limit_sweep,
                                      limit_term_convergence, mirrored_pair, oscillatory_integral, pde_equivalence,
                                      pde_residual, reflection_identity)
from slabcgo.reflect import check_parameter_symmetry

CELL = PeriodicCell(8.0, 16)
XI = (0.7, 0.4, 0.0)


@pytest.fixture(scope="module")
def pair():
    return contrast_pair(1.0, 0.05, "gaussian", (0.0, 0.0, 0.0), 0.8)


def _nodes(n, half=1.0):
    t = np.linspace(-half, half, n + 1)
    return np.array(np.meshgrid(t, t, t, indexing="ij")), (t[1] - t[0],) * 3


def test_identical_profiles_have_no_contrast():
    mat = MaterialProfile(1.0, 1.0, 1.0, (Bump("gaussian", (0, 0, 0), 0.8, 0.05),),
                          (Bump("gaussian", (0.1, 0, 0), 0.8, 0.05 + 0.02j),))
    same = TwoProfiles(mat, mat)
    assert same.identical
    pts = CELL.points()
    assert np.all(assemble_U(same, pts) == 0)
    c = same.contrast(pts)
    assert np.allclose(c["mu_tilde"], 0) and np.allclose(c["gamma_hat"], 2 * same.omega)
    x = np.ones((8,) + CELL.shape, complex)
    assert integral_identity(x, x, same, pts, CELL.cell_volume) == 0


def test_identical_profiles_give_zero_terms_and_canonical_values():
    mat = MaterialProfile(1.0, 1.0, 1.0, (Bump("gaussian", (0, 0, 0), 0.8, 0.05),))
    same = TwoProfiles(mat, mat)
    table = limit_sweep(same, XI, "same", (8.0, 16.0), CELL)
    assert all(abs(r["finite"]) == 0 and abs(r["limit"]) == 0 for r in table.rows)
    canon = canonical_amplitude_runs(same, XI, "same", (8.0, 16.0), CELL)
    assert all(r["abs_diff"] == 0 for r in canon.rows)


def test_profiles_must_share_background():
    with pytest.raises(ValueError, match="share"):
        TwoProfiles(MaterialProfile(1.0), MaterialProfile(2.0))


@settings(max_examples=20, deadline=None)
@given(c=st.tuples(st.floats(-0.5, 0.5), st.floats(-0.5, 0.5), st.floats(-3, 3)))
def test_oscillatory_integral_matches_plain_sum_when_resolved(c):
    # |c3| <= 3 is resolved by h = 0.25, where the plain sum is spectrally accurate
    cell = PeriodicCell(8.0, 32)
    c = 1j * np.array(c)
    pts = cell.points()
    g = np.exp(-np.sum(pts ** 2, axis=0))
    plain = np.sum(g * np.exp(np.tensordot(c, pts, axes=(0, 0)))) * cell.cell_volume
    assert abs(oscillatory_integral(g, c, cell) - plain) <= 1e-10


def test_oscillatory_integral_resolves_fast_phase():
    cell = PeriodicCell(8.0, 32)
    pts = cell.points()
    g = np.exp(-np.sum(pts ** 2, axis=0) / 0.5)
    c = np.array([0.0, 0.0, 30j])
    exact = (np.pi * 0.5) ** 1.5 * np.exp(-0.5 * 30 ** 2 / 4)
    assert abs(oscillatory_integral(g, c, cell) - exact) <= 1e-6


def test_pde_forms_agree(pair):
    rng = np.random.default_rng(0)
    x = rng.uniform(-1.5, 1.5, size=(3, 500))
    assert pde_equivalence(pair, x) <= 1e-8
    opp = mirrored_pair()
    assert pde_equivalence(opp, rng.uniform([-0.5, -0.5, -1], [0.5, 0.5, 2], size=(500, 3)).T) <= 1e-8


def test_unit_solution_has_zero_residual():
    mat = MaterialProfile(1.0, 1.0, 1.0, (Bump("gaussian", (0, 0, 0), 0.3, 0.05),))
    pts, h = _nodes(16)
    one = np.ones(pts.shape[1:])
    res = pde_residual(TwoProfiles(mat, mat), one, one, pts, h)
    assert res.max_interior == 0.0
    assert res.boundary["value"] == 0.0 and res.boundary["normal_derivative"] == 0.0


def test_difference_residual_converges_to_divergence_form():
    prof = contrast_pair(1.0, 0.05, "gaussian", (0.0, 0.0, 0.0), 0.25)
    errs = []
    inner = (slice(2, -2),) * 3
    for n in (16, 32, 64):
        pts, h = _nodes(n)
        c = prof.contrast(pts)
        res = pde_residual(prof, c["u"], c["v"], pts, h)
        r_v, r_u = divergence_form(prof, pts)
        errs.append(max(np.max(np.abs(res.r_v - r_v)[inner]), np.max(np.abs(res.r_u - r_u)[inner])))
    assert errs[1] < errs[0] / 8 and errs[2] < errs[1] / 8


def test_reflection_identity_for_symmetric_profiles(pair):
    for prof in (pair.mat1, pair.mat2):
        assert check_parameter_symmetry(prof, "gamma2")[0]
    rng = np.random.default_rng(4)
    y1 = rng.normal(size=(8,) + CELL.shape) + 1j * rng.normal(size=(8,) + CELL.shape)
    y2 = rng.normal(size=(8,) + CELL.shape) + 1j * rng.normal(size=(8,) + CELL.shape)
    lhs, rhs = reflection_identity(pair, y1, y2, CELL)
    assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(rhs))


def test_reflection_identity_rejects_asymmetric_profiles():
    with pytest.raises(ValueError, match="not invariant"):
        reflection_identity(mirrored_pair(), np.zeros((8,) + CELL.shape), np.zeros((8,) + CELL.shape),
                            PeriodicCell(4.0, 16), plane="gamma2")


def test_mirrored_pair_symmetries():
    prof = mirrored_pair()
    assert check_parameter_symmetry(prof.mat1, "gamma2")[0]
    assert check_parameter_symmetry(prof.mat2, "gamma1")[0]
    # both profiles are background on the slab faces
    rep = prof.boundary_report((-0.5, -0.5, 0.0), (0.5, 0.5, 1.0))
    assert rep["value_mismatch"] == 0 and rep["normal_derivative_mismatch"] == 0


def test_integration_by_parts_closure(pair):
    pp = build_phase(XI, 16.0, pair.k, "same")
    c1, c2 = cgo_pair(pair, pp, PeriodicCell(8.0, 32))
    rep = ibp_closure(pair, c1, c2)
    assert abs(rep["defect"]) <= 1e-9 * abs(rep["first"])
    assert abs(rep["defect"]) <= rep["budget"]


def test_limit_term_validation(pair):
    with pytest.raises(ValueError, match="same-plane"):
        limit_term_convergence(mirrored_pair(), XI, "opposite", (8.0, 16.0), "lim4", PeriodicCell(4.0, 16))
    with pytest.raises(ValueError, match="unknown term"):
        limit_term_convergence(pair, XI, "same", (8.0,), "lim9", CELL)
    with pytest.raises(ValueError, match="empty"):
        limit_sweep(pair, XI, "same", (), CELL)
    with pytest.raises(ValueError, match="increasing"):
        limit_sweep(pair, XI, "same", (16.0, 8.0), CELL)


def test_convergence_table_tail():
    rows = [dict(tau=t, term="lim1", abs_diff=1.0 / t) for t in (2.0, 4.0, 8.0, 16.0)]
    table = ConvergenceTable(rows, {})
    assert table.tail_decreasing("lim1")
    rows[-1]["abs_diff"] = 1.0
    assert not ConvergenceTable(rows, {}).tail_decreasing("lim1")
