"""Razumikhin profile quantities, zeta constructions, checks and certificate pipelines."""
import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from delaycert.certify import (CertificationInfeasible, CertifyConfig, RazumikhinProfile, certify_global,
                               certify_point, certify_region, certify_shifted, compute_h, compute_T, compute_V,
                               compute_zeta, compute_zeta_global, resolve_horizon, select_tp, verify_field_sign,
                               verify_level_set)
from delaycert.core import DenseTrajectory
from delaycert.integrate import IntegratorConfig, integrate_ode, integrate_ode_backward
from delaycert.systems import ConfigurationError, DelaySignal, example15, from_expressions, linear_positive

import _oracles as O

FAST = CertifyConfig(trials=8, level_samples=300, level_sim_trials=3)


def exp_profile(t_end=10.0, n=2001):
    t = np.linspace(0.0, t_end, n)
    return RazumikhinProfile(DenseTrajectory.from_nodes(t, np.exp(-t), -np.exp(-t)))


def scalar_decay():
    return from_expressions("decay", ["-x1"], ["0"], 1.0, [DelaySignal.constant(0.5, 1.0)], equilibrium=[0.0])


# --- T, V, h --------------------------------------------------------------------------


def test_T_examples(fixture_grid):
    p = exp_profile()
    assert compute_T(p, 0, 0.7).time == pytest.approx(-math.log(0.7), abs=1e-9)
    g = RazumikhinProfile(fixture_grid)
    assert compute_T(g, 0, 0.7).time == pytest.approx(0.75, abs=1e-12)
    assert compute_T(g, 0, 1.0).time == pytest.approx(0.0, abs=1e-12)
    capped = compute_T(g, 0, 0.05)
    assert capped.capped and capped.time == 4.0
    with pytest.raises(ValueError):
        compute_T(g, 0, 1.2)


def test_V_examples():
    p = exp_profile()
    assert compute_V(p, [1.0]) == 1.0
    assert compute_V(p, [0.5]) == pytest.approx(0.5, abs=1e-9)
    t = np.linspace(0.0, 10.0, 2001)
    y = np.column_stack([np.exp(-t), 2 * np.exp(-2 * t)])
    dy = np.column_stack([-np.exp(-t), -4 * np.exp(-2 * t)])
    p2 = RazumikhinProfile(DenseTrajectory.from_nodes(t, y, dy))
    # one component at its start value dominates the max rule
    assert compute_V(p2, [1.0, 0.01]) == 1.0
    with pytest.raises(ValueError):
        compute_V(p2, [1.5, 0.1])


def test_h_examples(fixture_grid):
    p = exp_profile()
    for u in (0.0, 0.3, 4.0):
        assert compute_h(p, 0, u).time == pytest.approx(u, abs=1e-9)
    g = RazumikhinProfile(fixture_grid)
    assert compute_h(g, 0, 1.5).time == pytest.approx(2.4, abs=1e-12)
    assert compute_h(g, 0, 0.5).time == pytest.approx(0.5, abs=1e-12)


@given(st.floats(0.0, 1.0), st.floats(0.0, 1.0))
def test_T_nonincreasing_in_level(a, b):
    g = RazumikhinProfile(DenseTrajectory.piecewise_linear(np.arange(5.0), [1.0, 0.6, 0.8, 0.3, 0.1]))
    lo, hi = sorted((a, b))
    assert compute_T(g, 0, hi).time <= compute_T(g, 0, lo).time


def test_V_is_exp_minus_T_and_h_dominates_u():
    tr = integrate_ode(example15(), [2.2, 2.0], (0.0, 50.0), IntegratorConfig(step=0.05))
    p = RazumikhinProfile(tr)
    rng = np.random.default_rng(0)
    X = rng.random((1000, 2)) * tr.y[0]
    for x in X:
        T = min(compute_T(p, i, x[i]).time for i in range(2))
        assert compute_V(p, x) == pytest.approx(math.exp(-T), abs=1e-12)
    for u in rng.uniform(0, 50, 200):
        for i in range(2):
            assert compute_h(p, i, u).time >= u
    m = p.envelope(0, np.linspace(0, 50, 5000))
    assert np.all(np.diff(m) <= 0) and np.all(m <= tr(np.linspace(0, 50, 5000))[:, 0] + 1e-15)


# --- tp and zeta --------------------------------------------------------------------------


def test_select_tp_examples():
    p = exp_profile()
    tp = select_tp(p.traj, 0.01)
    assert tp >= -math.log(0.99)
    assert tp - -math.log(0.99) <= p.traj.t[1] - p.traj.t[0]
    const = DenseTrajectory.piecewise_linear([0.0, 1.0, 2.0], [1.0, 1.0, 1.0])
    with pytest.raises(CertificationInfeasible):
        select_tp(const)
    tr = integrate_ode(example15(), [2.2, 2.0], (0.0, 100.0), IntegratorConfig(step=0.05))
    assert math.isfinite(select_tp(tr))


def test_zeta_examples(fixture_grid):
    z = compute_zeta(exp_profile(), 0.1)
    assert z.value[0] == pytest.approx(math.exp(-0.1), abs=1e-12)
    assert z.h[0] == pytest.approx(0.1, abs=1e-9)
    g = compute_zeta(RazumikhinProfile(fixture_grid), 1.5)
    assert g.value[0] == pytest.approx(0.6, abs=1e-12)
    assert g.h[0] == pytest.approx(2.4, abs=1e-12)
    assert g.oracle_gap < 1e-12


def test_example15_zeta_dominates_one_one():
    tr = integrate_ode(example15(), [2.2, 2.0], (0.0, 15000.0), IntegratorConfig(step=0.1))
    p = RazumikhinProfile(tr)
    z = compute_zeta(p, select_tp(tr))
    assert np.all(z.value > 1.0)
    assert z.oracle_gap < 1e-8


def test_strictly_decreasing_zeta_is_state_at_tp():
    sys = linear_positive()
    # (1, 1) spans the slow eigendirection, so every component decays strictly
    tr = integrate_ode(sys, [5.0, 5.0], (0.0, 20.0), IntegratorConfig(step=0.05))
    assert np.all(np.diff(tr.y, axis=0) < 0)
    tp = select_tp(tr)
    z = compute_zeta(RazumikhinProfile(tr), tp)
    assert np.allclose(z.h, tp, atol=1e-9)
    assert np.array_equal(z.value, tr(tp))


def test_linear_scaling_of_zeta():
    sys = linear_positive()
    cfg = IntegratorConfig(step=0.05)
    base = integrate_ode(sys, [5.0, 3.0], (0.0, 60.0), cfg)
    tp = select_tp(base)
    z1 = compute_zeta(RazumikhinProfile(base), tp).value
    for lam in (2.0, 10.0):
        tr = integrate_ode(sys, [5.0 * lam, 3.0 * lam], (0.0, 60.0), cfg)
        assert np.allclose(compute_zeta(RazumikhinProfile(tr), tp).value, lam * z1, rtol=0, atol=1e-8 * lam)


def oracle_gaps(traj, n=O.GRID):
    """Largest disagreement of T, h and zeta with brute force on an n-point grid.

    Returns ``(time_gap_in_cells, value_gap, capping_mismatches)``.
    """
    p = RazumikhinProfile(traj)
    tps = np.linspace(traj.t_start, traj.t_end, 7)
    # the running minimum up to tp needs the sample at tp itself
    t, y = O.sample_grid(traj, n=n, extra=tps)
    cell = O.cell(traj, n)
    time_gap, value_gap, mismatches = 0.0, 0.0, 0
    for i in range(traj.n):
        for a in np.linspace(0.05, 1.0, 12) * traj.y[0, i]:
            T = compute_T(p, i, a)
            bf = O.bf_T(t, y, i, a)
            if math.isinf(bf):
                mismatches += not T.capped
            else:
                time_gap = max(time_gap, abs(T.time - bf) / cell)
        for u in np.linspace(traj.t_start, traj.t_end, 15)[:-1]:
            hh = compute_h(p, i, u)
            bf = O.bf_h(t, y, i, u)
            if hh.capped or math.isinf(bf):
                # a flat tail: both must agree there is no further strict decrease
                mismatches += not (hh.capped and (math.isinf(bf) or bf >= traj.t_end - cell))
            else:
                time_gap = max(time_gap, abs(hh.time - bf) / cell)
    for tp in tps:
        value_gap = max(value_gap, float(np.max(np.abs(compute_zeta(p, tp).value - O.bf_zeta(t, y, tp)))))
    return time_gap, value_gap, mismatches


def test_oracle_equivalence_on_synthetic_trajectories():
    for traj in O.synthetic_trajectories():
        time_gap, value_gap, mismatches = oracle_gaps(traj)
        assert time_gap <= 1.0 + 1e-6 and value_gap <= 1e-6 and mismatches == 0


def test_oracle_equivalence_on_rough_trajectories():
    # random slopes make sharp interior minima the grid misses by ~y'' dt^2 / 8,
    # so the value comparison needs a finer grid than the smooth corpus
    for traj in O.synthetic_trajectories(rough=True):
        time_gap, value_gap, mismatches = oracle_gaps(traj, 40 * O.GRID)
        assert time_gap <= 1.0 + 1e-6 and value_gap <= 1e-6 and mismatches == 0


# --- global zeta ----------------------------------------------------------------------------


def test_zeta_global_scalar_closed_form():
    sys = scalar_decay()
    cfg = IntegratorConfig(step=0.01)
    back = integrate_ode_backward(sys, [1.0], 3.0, cfg).trajectory
    fwd = integrate_ode(sys, [1.0], (0.0, 10.0), cfg)
    p = RazumikhinProfile(back.concat(fwd), two_sided=True)
    for c in (0.5, 1.0, 2.0, 10.0, math.exp(3.0) * 0.999):
        z = compute_zeta_global(p, c)
        assert z.value[0] == pytest.approx(c, rel=1e-6)
        assert not z.window_limited
    assert compute_zeta_global(p, 100.0).window_limited
    # the seam c = 1 agrees with the forward construction at tp = 0
    fz = compute_zeta(RazumikhinProfile(fwd), 0.0).value
    assert compute_zeta_global(p, 1.0).value == pytest.approx(fz, abs=1e-12)
    with pytest.raises(ValueError):
        compute_zeta_global(p, 0.0)


def test_zeta_global_linear_monotone_in_c():
    sys = linear_positive()
    cfg = IntegratorConfig(step=0.05)
    back = integrate_ode_backward(sys, [1.0, 1.0], 10.0, cfg).trajectory
    p = RazumikhinProfile(back.concat(integrate_ode(sys, [1.0, 1.0], (0.0, 50.0), cfg)), two_sided=True)
    z1, z2 = compute_zeta_global(p, 1.0).value, compute_zeta_global(p, 2.0).value
    assert np.all(z2 > z1)
    cs = np.geomspace(0.1, 1000.0, 40)
    vals = np.array([compute_zeta_global(p, c).value for c in cs])
    assert np.all(np.diff(vals, axis=0) >= 0)
    # backward growth is along the slow eigenvector: zeta^c = sqrt(c) (1, 1)
    assert np.allclose(vals[cs >= 1], np.sqrt(cs[cs >= 1])[:, None], rtol=1e-6)


# --- checks ------------------------------------------------------------------------------------


def test_field_sign_examples():
    ex = example15()
    assert verify_field_sign(ex, [1.0, 1.0]).passed
    assert not verify_field_sign(ex, [1.0, 1.0], strict=True).passed
    bad = verify_field_sign(ex, [2.0, 2.0])
    assert not bad.passed
    assert bad.witness["labels"] == ["x_2"]
    assert np.allclose(bad.details["field"], [-1.2, 0.4])
    assert verify_field_sign(linear_positive(), [1.0, 1.0], strict=True).passed


def test_level_set_check_example15():
    sys = example15()
    tr = integrate_ode(sys, [2.2, 2.0], (0.0, 15000.0), IntegratorConfig(step=0.1))
    p = RazumikhinProfile(tr)
    tp = select_tp(tr)
    zeta = compute_zeta(p, tp).value
    res = verify_level_set(sys, p, tp, 1000, seed=0, zeta=zeta, sim_trials=5, cfg=CertifyConfig())
    assert res.passed, res.witness
    assert res.details["members"] == 1000
    assert compute_V(p, zeta) <= math.exp(-tp) * (1 + 1e-12)
    assert compute_V(p, [0.0, 0.0]) <= math.exp(-tp)


# --- pipelines -------------------------------------------------------------------------------


def test_certify_region_example15():
    cert = certify_region(example15(r=1.0), [2.2, 2.0], FAST)
    assert cert.verified, cert.reason
    assert np.all(cert.zeta > 1.0)
    for name in ("zeta_oracle", "field_sign", "level_set", "sweep"):
        assert cert.checks[name].passed
    assert cert.checks["sweep"].details["domination_max_excess"] <= 0


def test_certify_region_zero_start_is_infeasible():
    cert = certify_region(example15(), [0.0, 0.0], FAST)
    assert cert.status == "infeasible"


def test_certify_region_linear_and_json():
    cert = certify_region(linear_positive(), [5.0, 5.0], FAST)
    assert cert.verified
    d = json.loads(cert.to_json())
    for key in ("kind", "system_digest", "zeta", "tp", "checks", "sweep", "verified", "provenance"):
        assert key in d
    assert set(d["sweep"]) == {"trials", "horizon", "max_terminal_norm", "seed"}
    assert d["kind"] == "local" and d["verified"] is True
    # same inputs, same bytes
    assert certify_region(linear_positive(), [5.0, 5.0], FAST).to_json() == cert.to_json()


def test_certify_point():
    ok = certify_point(example15(), [1.0, 1.0], FAST)
    assert ok.verified
    assert any("non-strict" in n for n in ok.notes)
    bad = certify_point(example15(), [2.0, 2.0], FAST)
    assert bad.status == "unverified"
    assert bad.checks["field_sign"].witness["components"] == [1]
    strict = certify_point(linear_positive(), [1.0, 1.0], CertifyConfig(trials=4, strict=True))
    assert strict.verified


def test_certify_global_scalar_and_infeasible():
    cert = certify_global(scalar_decay(), [1.0], [1.0, 2.0, 4.0, 16.0], CertifyConfig(trials=4, expansion=10.0))
    vals = [z["zeta"][0] for z in cert.zeta_c]
    # the undelayed backward run uses the default RK4 step 0.1: error ~1e-6 relative
    assert vals == pytest.approx([1.0, 2.0, 4.0, 16.0], rel=1e-5)
    assert cert.verified
    ex = certify_global(example15(), [1.0, 1.0], None, FAST)
    assert ex.status == "infeasible"
    assert "backward divergence absent" in ex.reason
    with pytest.raises(ConfigurationError):
        certify_global(scalar_decay(), [1.0], [2.0, 1.0], FAST)


def test_certify_global_linear_growth():
    cert = certify_global(linear_positive(), [1.0, 1.0], [1.0, 5.0, 25.0], CertifyConfig(trials=5, expansion=4.0))
    vals = np.array([z["zeta"] for z in cert.zeta_c])
    assert np.all(np.diff(vals, axis=0) > 0)
    assert np.allclose(vals, np.sqrt([1.0, 5.0, 25.0])[:, None], rtol=1e-6)
    assert cert.verified
    assert any("not a proof" in n for n in cert.notes)


def test_certify_shifted_scalar():
    from delaycert.systems import scalar_shifted
    cert = certify_shifted(scalar_shifted(), [1.8], [0.2], FAST)
    assert cert.verified, cert.reason
    assert cert.zeta_lower[0] <= 0.5 and cert.zeta_upper[0] >= 1.5
    assert cert.zeta_lower[0] <= 1.0 <= cert.zeta_upper[0]
    # odd symmetry of the shifted dynamics
    assert 1.0 - cert.zeta_lower[0] == pytest.approx(cert.zeta_upper[0] - 1.0, abs=1e-12)


def test_certify_shifted_at_origin_matches_region_twice():
    lin = linear_positive()
    cert = certify_shifted(lin, [5.0, 5.0], [-5.0, -5.0], FAST)
    region = certify_region(lin, [5.0, 5.0], FAST)
    assert np.allclose(cert.zeta_upper, region.zeta, atol=1e-12)
    assert np.allclose(cert.zeta_lower, -region.zeta, atol=1e-12)
    assert cert.verified


def test_certify_shifted_needs_bracketing():
    from delaycert.systems import scalar_shifted
    assert certify_shifted(scalar_shifted(), [0.9], [0.2], FAST).status == "infeasible"


def test_default_horizon_rule():
    sys = from_expressions("h", ["-0.5*x1"], ["0"], 2.0, [DelaySignal.constant(1.0, 2.0)], equilibrium=[0.0])
    assert resolve_horizon(sys, CertifyConfig()) == pytest.approx(max(20 / 0.5, 50 * 2.0), rel=1e-6)
    flat = from_expressions("flat", ["-x1^3"], ["0"], 1.0, [DelaySignal.constant(0.0, 1.0)], equilibrium=[0.0])
    with pytest.raises(ConfigurationError):
        resolve_horizon(flat, CertifyConfig())
