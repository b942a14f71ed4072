import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from slabcgo.core_algebra import Bump, MaterialProfile
from slabcgo.forward_slab import (CutoffSpec, InteriorSolver, LaxPhillipsContext, SlabGrid, SourcePair, YeeBox,
                                  lift_profile, rhs_from_lift, smoothstep, smoothstep_derivative,
                                  solve_constant_maxwell, trace_lift)
from slabcgo.slab_greens import ModeSpec

GRID = SlabGrid(1.0, 1.5, 24, 8)
CUT = CutoffSpec(0.3, 0.45, 0.65)


def _datum(grid):
    x = grid.axes()[0]
    X, Y = np.meshgrid(x, x, indexing="ij")
    fb = np.clip(1 - (X ** 2 + Y ** 2) / 1.2 ** 2, 0, None) ** 4
    return np.array([0 * fb, fb, 0 * fb])


@settings(max_examples=30, deadline=None)
@given(t=st.floats(-1, 2))
def test_smoothstep_is_monotone_ramp(t):
    assert 0.0 <= smoothstep(t) <= 1.0
    assert smoothstep_derivative(t) >= 0.0
    h = 1e-6
    if 0 < t - h and t + h < 1:
        assert abs((smoothstep(t + h) - smoothstep(t - h)) / (2 * h) - smoothstep_derivative(t)) < 1e-6


def test_cutoff_shape():
    x = np.array([[0.0, 0.44, 0.7, 0.55], [0.0, 0.0, 0.0, 0.0], [0.5, 0.0, 1.0, 0.3]])
    v = CUT.value(x)
    assert v[0] == 1.0 and v[1] == 1.0 and v[2] == 0.0 and 0 < v[3] < 1
    g = CUT.gradient(x)
    assert np.all(g[2] == 0) and g[0, 3] < 0
    with pytest.raises(ValueError):
        CutoffSpec(0.5, 0.4, 0.6)


def test_trace_lift_matches_datum():
    f = _datum(GRID)
    e = trace_lift(f, GRID)
    top = np.cross([0.0, 0.0, 1.0], e[:, :, :, -1], axis=0)
    assert np.allclose(top, f)
    assert np.allclose(e[:, :, :, 0], 0)
    assert lift_profile(0.5, 1.0) == 0.25
    with pytest.raises(ValueError, match="tangential"):
        trace_lift(f + np.array([0, 0, 1.0])[:, None, None], GRID)


def test_source_pair_algebra():
    a = SourcePair.zeros(GRID.shape)
    b = SourcePair(np.ones((3,) + GRID.shape), 2 * np.ones((3,) + GRID.shape))
    c = (a + b * 2.0) - b
    assert np.allclose(c.f2, 2.0)
    assert np.allclose(SourcePair.unravel(c.ravel(), GRID.shape).f1, c.f1)


def test_constant_K_vanishes():
    mat = MaterialProfile(2.0)
    ctx = LaxPhillipsContext(mat, GRID, ModeSpec(mat.k, 1.0, 7), CUT, 0.75)
    src = rhs_from_lift(trace_lift(_datum(GRID), GRID), mat, GRID)
    assert ctx.apply_K(src).norm(GRID) <= 1e-10 * src.norm(GRID)


def test_context_validation():
    mat = MaterialProfile(2.0)
    spec = ModeSpec(mat.k, 1.0, 7)
    with pytest.raises(ValueError, match="cutoff transition"):
        LaxPhillipsContext(mat, GRID, spec, CUT, 0.6)
    big = MaterialProfile(2.0, 1.0, 1.0, (Bump("poly", (0, 0, 0.5), 0.4, 0.05),))
    with pytest.raises(ValueError, match="within"):
        LaxPhillipsContext(big, GRID, spec, CUT, 0.75)
    with pytest.raises(ValueError, match="does not match"):
        solve_constant_maxwell(SourcePair.zeros(GRID.shape), mat, GRID, ModeSpec(1.0, 1.0, 7))


def test_constant_solve_rejects_sources_on_the_edge():
    mat = MaterialProfile(2.0)
    src = SourcePair(np.ones((3,) + GRID.shape), np.zeros((3,) + GRID.shape))
    with pytest.raises(ValueError, match="transverse edge"):
        solve_constant_maxwell(src, mat, GRID, ModeSpec(mat.k, 1.0, 7))


def test_yee_energy_identity():
    mat = MaterialProfile(2.0, 1.0, 1.0, (Bump("poly", (0, 0, 0.5), 0.25, 0.05),),
                          (Bump("poly", (0, 0, 0.5), 0.25, 0.05 + 0.05j),))
    box = YeeBox(GRID, 0.75)
    solver = InteriorSolver(mat, box)
    rng = np.random.default_rng(0)
    eb = rng.normal(size=int(box.boundary.sum())) + 0j
    e, h, res = solver.solve_staggered(eb, np.zeros(box.curl.shape[0], complex), np.zeros(box.n_edges, complex))
    assert res <= 1e-10
    assert solver.poynting_balance(e, h, np.zeros(box.n_edges, complex))["relative_mismatch"] <= 1e-10
