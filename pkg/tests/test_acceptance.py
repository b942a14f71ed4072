"""Acceptance criteria at their stated tolerances, one verdict line each."""

import time

import numpy as np
import pytest

from slabcgo import experiments as ex
from slabcgo.identity_harness import TwoProfiles, canonical_amplitude_runs, pde_equivalence, pde_residual

pytestmark = pytest.mark.slow


@pytest.fixture(scope="module")
def reflect_result():
    return ex.reflect_traces(ex.ReflectConfig())


def test_criterion_1_factorization(record_criterion):
    r = ex.factorize_check(ex.FactorizeConfig())
    rep = r.report
    ok = rep["residuals"][-1] <= 1e-6 and rep["reduction"] >= 10 and rep["runtime"] <= 30
    assert record_criterion(1, "factorization", ok,
                            f"residual {rep['residuals'][-1]:.2e} at 32^3, reduction {rep['reduction']:.0f}x, "
                            f"{rep['runtime']:.1f} s")


def test_criterion_2_phase_invariants(record_criterion):
    t0 = time.perf_counter()
    r = ex.phase_table(ex.PhaseConfig())
    elapsed = time.perf_counter() - t0
    taus = sorted({row["tau"] for row in r.rows})
    ok = r.report["max_error"] <= 1e-12 and elapsed <= 1.0 and taus[0] == 2 and taus[-1] == 1024
    assert record_criterion(2, "phase invariants", ok,
                            f"max error {r.report['max_error']:.1e} over tau 2..1024, {elapsed:.2f} s")


def test_criterion_3_corrector_decay(record_criterion):
    r = ex.cgo_decay(ex.CGODecayConfig())
    rep = r.report
    ok = -1.3 <= rep["slope"] <= -0.7 and rep["r2"] >= 0.95 and rep["ratio_decreasing"] and rep["runtime"] <= 300
    assert record_criterion(3, "corrector decay", ok,
                            f"slope {rep['slope']:.3f}, R^2 {rep['r2']:.4f}, ratio decreasing "
                            f"{rep['ratio_decreasing']}, {rep['runtime']:.1f} s")


def test_criterion_4_trace_cancellation(reflect_result, record_criterion):
    worst = reflect_result.report["trace_max"]
    assert record_criterion(4, "trace cancellation", worst <= 1e-10, f"max relative trace {worst:.1e}")


def test_criterion_5_cross_terms(reflect_result, record_criterion):
    rep = reflect_result.report
    ok = rep["exponent_max_error"] <= 1e-12 and rep["cross_terms_decrease"] and rep["bound4_bounded"]
    assert record_criterion(5, "opposite-plane cross terms", ok,
                            f"exponent error {rep['exponent_max_error']:.1e}, decreasing {rep['cross_terms_decrease']}, "
                            f"term-4 bound bounded {rep['bound4_bounded']}")


def test_criterion_6_greens_functions(record_criterion):
    r = ex.greens_convergence(ex.GreensConfig())
    rep = r.report
    errs = rep["errors_at_top_M"]
    boundary = max(row["trace_residual"] for row in r.rows)
    ok = (max(errs.values()) <= 1e-2 and boundary <= 1e-8 and rep["radiation"]["decreasing"]
          and rep["runtime"] <= 120)
    assert record_criterion(6, "slab Green's functions", ok,
                            f"M=20 errors D {errs['dirichlet']:.1e} N {errs['neumann']:.1e}, boundary {boundary:.1e}, "
                            f"radiation decreasing {rep['radiation']['decreasing']}, {rep['runtime']:.1f} s")


def test_criterion_7_forward_solver(record_criterion):
    mms = ex.forward_mms(ex.ForwardMMSConfig())
    lp = ex.lax_phillips(ex.LaxPhillipsConfig())
    const, contrast = lp.rows
    runtime = mms.report["runtime"] + sum(lp.report["runtime"].values())
    err = max(mms.report["errors"].values())
    ok = (err <= 5e-2 and const["K_norm"] <= 1e-10 and const["iterations"] <= 2
          and contrast["maxwell_residual"] <= 5e-2 and runtime <= 600)
    assert record_criterion(7, "forward solver", ok,
                            f"MMS error {err:.1e}, constant K {const['K_norm']:.1e} in {const['iterations']} "
                            f"iterations, contrast residual {contrast['maxwell_residual']:.1e}, {runtime:.0f} s")


def test_criterion_8_identity_harness(record_criterion):
    cfg = ex.IdentityConfig()
    lim = ex.identity_limits(cfg)
    opp = ex.identity_limits(ex.IdentityConfig(scenario="opposite"))
    pair, cell = ex.identity_profiles(cfg)
    same = TwoProfiles(pair.mat2, pair.mat2)
    zeros = canonical_amplitude_runs(same, cfg.xi, "same", ex.DEFAULT_IDENTITY_TAUS["same"][:2], cell)
    # complex gamma / gamma is 1 only to rounding
    zero_max = max(max(abs(r["finite"]), abs(r["limit"])) for r in zeros.rows)
    zero_ok = zero_max <= 1e-14
    rng = np.random.default_rng(0)
    equiv = pde_equivalence(pair, rng.uniform(-1.5, 1.5, size=(3, 1000)))
    t = np.linspace(-1, 1, 17)
    pts = np.array(np.meshgrid(t, t, t, indexing="ij"))
    one = np.ones(pts.shape[1:])
    unit = pde_residual(same, one, one, pts, (t[1] - t[0],) * 3).max_interior
    checks = lim.report["checks"]
    opp_ok = all(opp.report["checks"].values())
    ok = (zero_ok and checks["lim1_tail_decreasing"] and checks["canonical_approach"] and opp_ok
          and equiv <= 1e-8 and unit == 0)
    assert record_criterion(8, "identity harness", ok,
                            f"equal profiles max {zero_max:.0e}, lim1 tail decreasing {checks['lim1_tail_decreasing']}, "
                            f"canonical approach same {checks['canonical_approach']} opposite {opp_ok}, "
                            f"pde equivalence {equiv:.1e}, unit residual {unit:.1e}")
