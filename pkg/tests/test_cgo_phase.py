import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from slabcgo.cgo_phase import (EXPONENT_PLANES, admissibility_check, build_phase, build_Z0, canonical_amplitudes,
                               combined_exponent, exponent_bound, exponent_phi, loglog_slope, normalize_scenario,
                               tau_sweep)

xi_st = st.tuples(st.floats(-3, 3), st.floats(-3, 3), st.floats(-3, 3)).filter(
    lambda v: np.hypot(v[0], v[1]) > 1e-2)


@settings(max_examples=50, deadline=None)
@given(xi=xi_st, tau=st.floats(4.0, 1024.0), k=st.floats(0.2, 3.0), scenario=st.sampled_from(["same", "opposite"]))
def test_phase_invariants(xi, tau, k, scenario):
    pp = build_phase(xi, tau, k, scenario)
    err = pp.invariant_errors()
    assert err["zeta_dot_zeta_err"] <= 1e-12
    assert err["sum_err"] <= 1e-12
    assert np.allclose(np.linalg.norm(pp.zeta1.imag), np.linalg.norm(pp.zeta2.imag))


@settings(max_examples=30, deadline=None)
@given(xi=xi_st, tau=st.floats(4.0, 512.0), scenario=st.sampled_from(["same", "opposite"]),
       choice=st.sampled_from(["beta", "alpha"]))
def test_canonical_amplitudes_are_admissible(xi, tau, scenario, choice):
    pp = build_phase(xi, tau, 1.0, scenario)
    for which, amp in zip((1, 2), canonical_amplitudes(pp, choice)):
        ok, res = admissibility_check(build_Z0(pp, amp, which), pp, which)
        assert ok, res


def test_frame_is_orthonormal():
    pp = build_phase((1.0, 0.5, 0.3), 8.0, 1.0)
    f = np.array(pp.f_frame)
    assert np.allclose(f @ f.T, np.eye(3))
    assert abs(pp.eta1 @ pp.xi) < 1e-14 and abs(pp.eta2 @ pp.xi) < 1e-14


def test_limits_of_scaled_phases():
    for scenario in ("same", "opposite"):
        pp = build_phase((1.0, 0.5, 0.3), 1e6, 1.0, scenario)
        assert np.allclose(pp.zeta1 / pp.tau, pp.limit1, atol=1e-6)
        assert np.allclose(pp.zeta2 / pp.tau, pp.limit2, atol=1e-6)


def test_opposite_requires_large_tau():
    with pytest.raises(ValueError, match="tau >"):
        build_phase((4.0, 0.0, 0.0), 1.5, 1.0, "opposite")
    with pytest.raises(ValueError):
        build_phase((1.0, 0.0, 0.0), 4.0, 1.0, "diagonal")
    assert normalize_scenario("same-plane") == "same"


def test_exponents_match_direct_evaluation():
    rng = np.random.default_rng(3)
    x = rng.uniform([-2, -2, 0], [2, 2, 1], size=(100, 3)).T
    for tau in (4.0, 32.0, 256.0):
        pp = build_phase((0.7, 0.4, 0.2), tau, 1.0, "opposite")
        for j, (p1, p2) in EXPONENT_PLANES.items():
            assert np.max(np.abs(exponent_phi(j, x, pp, 1.0) - combined_exponent(pp, x, p1, p2, 1.0))) <= 1e-12 * tau
            assert np.all(exponent_bound(j, x, pp, 1.0) <= 1.0 + 1e-12)


def test_exponent_phi_rejects_same_plane():
    with pytest.raises(ValueError):
        exponent_phi(2, np.zeros(3), build_phase((1.0, 0.0, 0.0), 4.0, 1.0, "same"), 1.0)


def test_tau_sweep_and_slope():
    assert tau_sweep(2, 16) == [2.0, 4.0, 8.0, 16.0]
    x = np.array(tau_sweep(2, 256))
    slope, r2 = loglog_slope(x, 3.0 / x)
    assert abs(slope + 1) < 1e-12 and r2 > 1 - 1e-12
