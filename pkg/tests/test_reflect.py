import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from slabcgo.core_algebra import Bump, MaterialProfile
from slabcgo.fields import PeriodicCell
from slabcgo.reflect import (REFLECTION_SIGNS, SlabGeometry, check_parameter_symmetry, face_layer, mirror_indices,
                             reflect_field8, reflect_grid_values, reflect_point, reflect_values, tangential_trace,
                             trace_cancellation)

coord = st.floats(-5, 5, allow_nan=False)


@settings(max_examples=40, deadline=None)
@given(x=st.tuples(coord, coord, coord), plane=st.sampled_from(["gamma1", "gamma2"]), L=st.floats(0.2, 3.0))
def test_reflection_is_an_involution(x, plane, L):
    x = np.array(x)
    y = reflect_point(x, plane, L)
    assert np.allclose(reflect_point(y, plane, L), x)
    assert np.allclose(y[:2], x[:2])
    u = np.arange(1.0, 9.0)
    assert np.allclose(reflect_values(reflect_values(u)), u)


def test_sign_pattern():
    assert REFLECTION_SIGNS.tolist() == [-1, 1, 1, -1, 1, -1, -1, 1]


def test_tangential_trace_of_sum_vanishes_on_the_plane():
    rng = np.random.default_rng(0)
    a = rng.normal(size=8) + 1j * rng.normal(size=8)
    f = lambda x: a.reshape(8, *([1] * (np.ndim(x) - 1))) * np.exp(-np.sum(np.asarray(x) ** 2, axis=0))
    for plane, height in (("gamma2", 0.0), ("gamma1", 1.0)):
        x = np.array([0.3, -0.2, height])
        total = f(x) + reflect_field8(f, plane, 1.0)(x)
        assert np.allclose(tangential_trace(total[5:8], plane), 0.0)


def test_mirror_indices_and_grid_reflection():
    cell = PeriodicCell(8.0, 16)
    axis = cell.axes()[2]
    jp = mirror_indices(axis, 0.0)
    assert np.allclose(axis[jp], -axis)
    with pytest.raises(ValueError, match="not aligned"):
        mirror_indices(axis, 0.1)
    vals = np.random.default_rng(1).normal(size=(8,) + cell.shape)
    refl, ok = reflect_grid_values(vals, axis, "gamma2", 1.0)
    assert ok.all()
    assert np.allclose(refl[5, ..., 3], -vals[5, ..., axis.size - 4])


def test_trace_cancellation_is_exact_for_any_field():
    cell = PeriodicCell(8.0, 16, center=(0.0, 0.0, 0.0))
    x = np.random.default_rng(2).normal(size=(8,) + cell.shape) + 0j
    assert trace_cancellation(x, cell, "gamma2", 1.0) <= 1e-14


def test_face_layer_interpolates_linearly():
    axis = np.linspace(0, 1, 5)
    v = 2 * axis + 1
    assert np.isclose(face_layer(v, axis, 0.6), 2.2)
    with pytest.raises(ValueError):
        face_layer(v, axis, 2.0)


def test_parameter_symmetry():
    sym = MaterialProfile(1.0, 1.0, 1.0, (Bump("poly", (0, 0, 0.5), 0.3, 0.1), Bump("poly", (0, 0, -0.5), 0.3, 0.1)))
    assert check_parameter_symmetry(sym, "gamma2")[0]
    asym = MaterialProfile(1.0, 1.0, 1.0, (Bump("poly", (0, 0, 0.5), 0.3, 0.1),))
    ok, mismatch = check_parameter_symmetry(asym, "gamma2")
    assert not ok and mismatch > 1e-3


def test_slab_geometry_validation():
    g = SlabGeometry()
    lo, hi = g.union_box("gamma2")
    assert lo[2] == -1.0 and hi[2] == 1.0
    with pytest.raises(ValueError, match="cutoff radii"):
        SlabGeometry(R=2.0, R1=1.0, R2=3.0)
    with pytest.raises(ValueError, match="inside the slab"):
        SlabGeometry(box_hi=(1.0, 1.0, 2.0))
