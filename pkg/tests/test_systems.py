"""Descriptors, field evaluation, validators, shifts, bounding systems and config files."""
import numpy as np
import pytest
from hypothesis import given, strategies as st

from delaycert import _kernels as K
from delaycert.core import Box, HistorySegment
from delaycert.systems import (CATALOG, ConfigurationError, DelaySignal, LINEAR_A, LINEAR_B, SystemDescriptor,
                               batch_undelayed_field, catalog_system, check_quasimonotonicity,
                               check_subhomogeneity, domain_box, dump_system, eval_delayed_field,
                               eval_undelayed_field, example15, from_expressions, linear_positive, load_system,
                               make_bounding_system, scalar_shifted, shift_to_origin, system_from_mapping)


def constant_delays(sys, value):
    return sys.with_delays([DelaySignal.constant(value, sys.r)] * sys.m)


def nonmonotone():
    return from_expressions("nonmonotone", ["-x1-x2", "-x2"], ["0", "0"], 1.0,
                            [DelaySignal.constant(0.5, 1.0)], equilibrium=[0.0, 0.0])


# --- field evaluation ---------------------------------------------------------


def test_example15_undelayed_values():
    sys = example15()
    assert np.allclose(eval_undelayed_field(sys, [0.0, 0.0]), [0.0, 0.0])
    assert np.allclose(eval_undelayed_field(sys, [1.0, 1.0]), [-0.5, 0.0], atol=1e-15)


def test_linear_undelayed_is_a_plus_b():
    sys = linear_positive()
    rng = np.random.default_rng(1)
    for v in rng.uniform(0, 5, (20, 2)):
        assert np.allclose(eval_undelayed_field(sys, v), (LINEAR_A + LINEAR_B) @ v, atol=1e-12)


def test_example15_delayed_value():
    sys = constant_delays(example15(r=1.0), 0.5)
    # h(0) = (1, 1) and h(-0.5) = (2, 2)
    h = HistorySegment.from_function(lambda s: [1 - 2 * s, 1 - 2 * s], 1.0, 2, derivative=lambda s: [-2, -2])
    # x1' = -1 + 4/5 and x2' = z1 - 2 * 1/2 = 2 - 1
    assert np.allclose(eval_delayed_field(sys, 3.0, h), [-0.2, 1.0], atol=1e-14)


def test_zero_history_gives_zero_field():
    for name in ("example15", "linear"):
        sys = catalog_system(name)
        assert np.all(eval_delayed_field(sys, 1.7, HistorySegment.constant(np.zeros(2), sys.r)) == 0.0)


def test_delayed_field_rejects_short_history():
    sys = example15(r=2.0)
    with pytest.raises(ConfigurationError):
        eval_delayed_field(sys, 0.0, HistorySegment.constant([1.0, 1.0], 1.0))


@pytest.mark.parametrize("name", sorted(CATALOG))
def test_constant_history_time_invariance(name):
    sys = catalog_system(name)
    rng = np.random.default_rng(7)
    box = domain_box(sys)
    for t, v in zip(rng.uniform(0, 100, 200), box.sample(rng, 200)):
        got = eval_delayed_field(sys, t, HistorySegment.constant(v, sys.r))
        assert np.array_equal(got, eval_undelayed_field(sys, v))


@pytest.mark.parametrize("name", sorted(CATALOG))
def test_compiled_field_matches_python_field(name):
    sys = catalog_system(name)
    kfield = sys.kernel_field()
    pfield = sys.python_field()
    rng = np.random.default_rng(3)
    for _ in range(50):
        x = rng.uniform(0, 5, sys.n)
        z = rng.uniform(0, 5, (sys.m, sys.n))
        a, b = np.zeros(sys.n), np.zeros(sys.n)
        kfield(0.0, x, z, a)
        pfield(0.0, x, z, b)
        assert np.allclose(a, b, rtol=1e-14, atol=1e-15)


def test_batch_field_matches_pointwise():
    sys = example15()
    X = np.random.default_rng(0).uniform(0, 5, (30, 2))
    B = batch_undelayed_field(sys, X)
    assert np.allclose(B, [eval_undelayed_field(sys, x) for x in X])


def test_equilibrium_residual_is_checked():
    with pytest.raises(ConfigurationError):
        from_expressions("bad", ["-x1+1"], ["0"], 1.0, [DelaySignal.constant(0.0, 1.0)], equilibrium=[0.0])


def test_expression_errors():
    with pytest.raises(ConfigurationError):
        from_expressions("bad", ["-x3"], ["0"], 1.0, [DelaySignal.constant(0.0, 1.0)])
    with pytest.raises(ConfigurationError):
        from_expressions("bad", ["-z1"], ["0"], 1.0, [DelaySignal.constant(0.0, 1.0)])


# --- delay signals ---------------------------------------------------------------


def test_delay_signal_bounds_enforced():
    with pytest.raises(ConfigurationError):
        DelaySignal.sinusoidal(1.0, 0.8, 0.5, 1.0)
    with pytest.raises(ConfigurationError):
        DelaySignal.constant(2.0, 1.0)
    with pytest.raises(ConfigurationError):
        example15(r=1.0, delays=[DelaySignal.constant(1.5, 1.5)] * 2)


@given(st.floats(0.05, 5.0), st.integers(0, 2 ** 31 - 1), st.floats(0.01, 3.0), st.floats(0.0, 6.3))
def test_delay_signals_stay_in_range(r, seed, freq, phase):
    t = np.linspace(0.0, 50.0, 2001)
    for d in (DelaySignal.sinusoidal(r, 0.5 * r, 0.5 * r, freq, phase), DelaySignal.random(r, seed, r / 10),
              DelaySignal.constant(0.3 * r, r)):
        v = d(t)
        assert np.all((v >= 0.0) & (v <= r))


def test_random_delay_prefix_is_stable():
    d = DelaySignal.random(1.0, 42, 0.25)
    t = np.linspace(0.0, 10.0, 500)
    # evaluating further out must not change earlier values
    assert np.array_equal(d(t), d(np.concatenate([t, [1000.0]]))[:-1])


@pytest.mark.parametrize("d", [DelaySignal.constant(0.3, 1.0), DelaySignal.sinusoidal(1.0, 0.5, 0.4, 0.7, 0.2),
                               DelaySignal.random(1.0, 9, 0.1)])
def test_kernel_delay_encoding_matches_signal(d):
    code, par, tab = d.encode(20.0)
    t = np.linspace(0.0, 20.0, 997)
    got = np.array([K._delay(code, par, tab, d.r, s) for s in t])
    assert np.allclose(got, d(t), atol=1e-14)


# --- validators ---------------------------------------------------------------------


@pytest.mark.parametrize("name", sorted(CATALOG))
def test_catalog_is_quasimonotone(name):
    sys = catalog_system(name)
    rep = check_quasimonotonicity(sys, 10_000, domain_box(sys), seed=0)
    assert rep.ok and rep.samples == 10_000


def test_nonmonotone_fixture_is_flagged():
    sys = nonmonotone()
    # the hand pair x = (0, 0), y = (0, 1), pinned at component 1
    fx = eval_undelayed_field(sys, [0.0, 0.0])[0]
    fy = eval_undelayed_field(sys, [0.0, 1.0])[0]
    assert fx == 0.0 and fy == -1.0 and fx > fy
    rep = check_quasimonotonicity(sys, 1000, Box.cube(0, 5, 2), seed=0)
    assert not rep.ok
    w = rep.violations[0]
    assert w["component"] == 0
    assert np.all(np.array(w["x"]) <= np.array(w["y"]))


def test_validator_is_deterministic():
    sys = nonmonotone()
    a = check_quasimonotonicity(sys, 500, Box.cube(0, 5, 2), seed=3)
    b = check_quasimonotonicity(sys, 500, Box.cube(0, 5, 2), seed=3)
    assert a.to_dict() == b.to_dict()
    with pytest.raises(ValueError):
        check_quasimonotonicity(sys, 0, Box.cube(0, 5, 2))


def test_subhomogeneity():
    lin = linear_positive()
    assert check_subhomogeneity(lin, 1.0, 10_000, domain_box(lin)).ok
    ex = example15()
    rep = check_subhomogeneity(ex, 1.0, 10_000, domain_box(ex))
    assert not rep.ok
    sq = from_expressions("square", ["-x1^2"], ["0"], 1.0, [DelaySignal.constant(0.0, 1.0)])
    rep = check_subhomogeneity(sq, 2.0, 10_000, Box.cube(0, 10, 1))
    assert "f" not in rep.parts()
    with pytest.raises(ValueError):
        check_subhomogeneity(lin, 0.0, 10, domain_box(lin))


# --- shifts -----------------------------------------------------------------------------


def test_identity_shift_for_zero_equilibrium():
    sys = example15()
    sh = shift_to_origin(sys, "above")
    X = np.random.default_rng(2).uniform(0, 5, (100, 2))
    assert np.allclose(batch_undelayed_field(sh, X), batch_undelayed_field(sys, X), atol=1e-14)


@pytest.mark.parametrize("direction", ["above", "below"])
def test_scalar_shift_gives_linear_system(direction):
    sh = shift_to_origin(scalar_shifted(), direction)
    rng = np.random.default_rng(5)
    for u, w in rng.uniform(0, 2, (100, 2)):
        got = sh.f(np.array([u]))[0] + sh.g(np.array([u]), np.array([[w]]))[0]
        assert got == pytest.approx(-2 * u + w, abs=1e-12)


@pytest.mark.parametrize("direction", ["above", "below"])
def test_shift_vanishes_at_origin(direction):
    for sys in (scalar_shifted(), example15()):
        sh = shift_to_origin(sys, direction)
        assert np.all(np.abs(eval_undelayed_field(sh, np.zeros(sys.n))) <= 1e-9)
    # order conditions carry over to both shifted systems of the scalar example
    sh = shift_to_origin(scalar_shifted(), direction)
    assert check_quasimonotonicity(sh, 2000, Box.cube(0, 1, 1)).ok


def test_callable_shift_matches_expression_shift():
    ex = scalar_shifted()
    plain = SystemDescriptor("plain", 1, ex.r, ex.f, ex.g, ex.delays, equilibrium=[1.0])
    for direction in ("above", "below"):
        a, b = shift_to_origin(ex, direction), shift_to_origin(plain, direction)
        X = np.linspace(0, 2, 21)[:, None]
        assert np.allclose(batch_undelayed_field(a, X), batch_undelayed_field(b, X), atol=1e-14)


def test_shift_needs_equilibrium():
    sys = from_expressions("noeq", ["-x1"], ["0"], 1.0, [DelaySignal.constant(0.0, 1.0)])
    with pytest.raises(ConfigurationError):
        shift_to_origin(sys)


# --- bounding system -------------------------------------------------------------------


def test_bounding_constant_history_is_undelayed():
    sys = example15()
    bd = make_bounding_system(sys)
    for v in ([0.3, 2.0], [1.0, 1.0]):
        assert np.allclose(eval_delayed_field(bd, 0.0, HistorySegment.constant(v, sys.r)),
                           eval_undelayed_field(sys, v))


def test_bounding_uses_window_max():
    bd = make_bounding_system(example15(r=1.0))
    # x2 peaks at 2 in the window, state (1, 1) at theta = 0
    h = HistorySegment.from_function(lambda s: [1.0, 2.0 - 4.0 * (s + 0.5) ** 2], 1.0, 2,
                                     derivative=lambda s: [0.0, -8.0 * (s + 0.5)])
    assert eval_delayed_field(bd, 0.0, h)[0] == pytest.approx(-0.2, abs=1e-12)


def test_bounding_decreasing_history_uses_oldest_sample():
    bd = make_bounding_system(linear_positive(r=1.0))
    h = HistorySegment.from_function(lambda s: [1 - s, 2 - 3 * s], 1.0, 2, derivative=lambda s: [-1, -3])
    oldest = np.array([2.0, 5.0])
    x0 = np.array([1.0, 2.0])
    assert np.allclose(eval_delayed_field(bd, 0.0, h), LINEAR_A @ x0 + LINEAR_B @ oldest)


@pytest.mark.parametrize("name", sorted(CATALOG))
def test_bounding_field_dominates_delayed_field(name):
    from delaycert.sampling import random_delays, random_history, trial_rng
    sys = catalog_system(name)
    bd = make_bounding_system(sys)
    box = domain_box(sys)
    for k in range(1000):
        rng = trial_rng(0, 9, k)
        h = random_history(rng, box.lower, box.upper, sys.r)
        s = sys.with_delays(random_delays(rng, sys.m, sys.r, "sinusoidal"))
        t = rng.uniform(0, 50)
        assert np.all(eval_delayed_field(s, t, h) <= eval_delayed_field(bd, t, h) + 1e-12)


# --- definition files -----------------------------------------------------------------


@pytest.mark.parametrize("name", sorted(CATALOG))
def test_dump_load_round_trip(tmp_path, name):
    sys = catalog_system(name)
    p = tmp_path / "sys.toml"
    p.write_text(dump_system(sys))
    back = load_system(p)
    assert back.describe() == sys.describe()
    X = domain_box(sys).sample(np.random.default_rng(0), 50)
    assert np.array_equal(batch_undelayed_field(back, X), batch_undelayed_field(sys, X))


def test_definition_file_errors(tmp_path):
    with pytest.raises(ConfigurationError):
        system_from_mapping({"dimension": 1, "f": ["-x1"], "g": ["0"]})
    with pytest.raises(ConfigurationError):
        system_from_mapping({"dimension": 2, "r": 1.0, "f": ["-x1"], "g": ["0"]})
    with pytest.raises(ConfigurationError):
        system_from_mapping({"dimension": 1, "r": 1.0, "f": ["-x1 +"], "g": ["0"]})
    with pytest.raises(ConfigurationError):
        system_from_mapping({"dimension": 1, "r": 1.0, "f": ["-x1"], "g": ["0"],
                             "delays": [{"kind": "sinusoidal", "mean": 0.5}]})
    bad = tmp_path / "bad.toml"
    bad.write_text("dimension = [")
    with pytest.raises(ConfigurationError):
        load_system(bad)
    with pytest.raises(ConfigurationError):
        catalog_system("nope")
