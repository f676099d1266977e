"""Order comparisons, dense trajectories, running minima and window suprema."""
import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from delaycert.core import (Box, DenseTrajectory, HistorySegment, as_state, cmp_leq, cmp_ll, cubic_range,
                            evaluate, first_below, running_min, window_sup)

finite = st.floats(-1e3, 1e3, allow_nan=False)


# --- comparisons -------------------------------------------------------------


def test_cmp_examples():
    assert cmp_leq([1, 2], [1, 2])
    assert not cmp_ll([1, 2], [1, 2])
    assert cmp_ll([0.5, 1.0], [1, 2])
    assert not cmp_leq([1, 3], [2, 2])
    # within the default slack
    assert cmp_leq([1 + 5e-10], [1.0])


def test_cmp_rejects_bad_input():
    with pytest.raises(ValueError):
        cmp_leq([1, 2], [1, 2, 3])
    with pytest.raises(ValueError):
        cmp_ll([np.nan], [1.0])
    with pytest.raises(ValueError):
        as_state([1.0, np.inf])
    with pytest.raises(ValueError):
        cmp_ll([0.0], [1.0], margin=-1)


@given(arrays(float, 3, elements=finite), arrays(float, 3, elements=finite))
def test_strict_order_implies_weak_order(a, b):
    if cmp_ll(a, b):
        assert cmp_leq(a, b)


@given(arrays(float, 2, elements=finite))
def test_order_is_reflexive_not_strict(a):
    assert cmp_leq(a, a)
    assert not cmp_ll(a, a)


def test_box():
    box = Box.cube(0.0, 2.0, 3)
    assert box.contains([0, 1, 2])
    assert not box.contains([0, 1, 2.1])
    pts = box.sample(np.random.default_rng(0), 100)
    assert pts.shape == (100, 3) and np.all((pts >= 0) & (pts <= 2))
    with pytest.raises(ValueError):
        Box(np.ones(2), np.zeros(2))


# --- dense trajectories -------------------------------------------------------


def test_breakpoints_exact_and_linear_midpoint(fixture_grid):
    assert evaluate(fixture_grid, 2.0)[0] == 0.8
    assert evaluate(fixture_grid, 1.5)[0] == pytest.approx(0.7)
    assert fixture_grid(np.arange(5.0))[:, 0].tolist() == [1.0, 0.6, 0.8, 0.3, 0.1]


def test_outside_domain_raises(fixture_grid):
    with pytest.raises(ValueError):
        fixture_grid(4.5)
    with pytest.raises(ValueError):
        fixture_grid(-0.1)


def test_hermite_reproduces_cubics():
    # Hermite interpolation is exact for cubic polynomials
    p = np.polynomial.Polynomial([0.3, -1.0, 0.4, -0.05])
    t = np.linspace(0.0, 3.0, 4)
    traj = DenseTrajectory.from_nodes(t, p(t), p.deriv()(t))
    s = np.linspace(0.0, 3.0, 301)
    assert np.allclose(traj(s)[:, 0], p(s), atol=1e-13)
    assert np.allclose(traj.derivative(s)[:, 0], p.deriv()(s), atol=1e-12)


def test_exp_interpolation_accuracy(exp_decay):
    s = np.linspace(0.0, 10.0, 7777)
    # Hermite error bound h^4 max|y(4)| / 384 is about 1.6e-12 here
    assert np.max(np.abs(exp_decay(s)[:, 0] - np.exp(-s))) < 2e-12


def test_trajectory_validation():
    with pytest.raises(ValueError):
        DenseTrajectory.piecewise_linear([0.0, 1.0, 1.0], [1.0, 2.0, 3.0])
    with pytest.raises(ValueError):
        DenseTrajectory.piecewise_linear([0.0, 1.0], [1.0, np.nan])


def test_concat_checks_junction(fixture_grid):
    tail = DenseTrajectory.piecewise_linear([4.0, 5.0], [0.1, 0.0])
    joined = fixture_grid.concat(tail)
    assert joined.t_end == 5.0 and joined(4.5)[0] == pytest.approx(0.05)
    with pytest.raises(ValueError):
        fixture_grid.concat(DenseTrajectory.piecewise_linear([4.0, 5.0], [0.2, 0.0]))


@given(st.floats(-5, 5), st.floats(-5, 5), st.floats(-5, 5), st.floats(-5, 5))
def test_cubic_range_matches_dense_sampling(a, b, c, d):
    lo, hi = cubic_range(a, b, c, d)
    s = np.linspace(0.0, 1.0, 20001)
    v = a + s * (b + s * (c + s * d))
    # sampled extremes never beat the exact ones and come within sampling error
    assert v.min() >= lo - 1e-12 and v.max() <= hi + 1e-12
    assert v.min() - lo < 1e-6 and hi - v.max() < 1e-6


# --- running minimum ------------------------------------------------------------


def test_running_min_fixture(fixture_grid):
    assert running_min(fixture_grid, 0, 2.0) == pytest.approx(0.6)
    assert running_min(fixture_grid, 0, 3.0) == pytest.approx(0.3)
    assert running_min(fixture_grid, 0, 0.0) == 1.0


def test_running_min_of_decreasing_is_the_trajectory(exp_decay):
    for t in (0.0, 0.37, 2.0, 9.99):
        assert running_min(exp_decay, 0, t) == pytest.approx(np.exp(-t), abs=1e-12)


def _random_traj(seed, n=2):
    rng = np.random.default_rng(seed)
    t = np.unique(np.concatenate([[0.0], rng.uniform(0, 5, 15), [5.0]]))
    y = rng.normal(size=(t.size, n))
    return DenseTrajectory.from_nodes(t, y, rng.normal(size=(t.size, n)))


@given(st.integers(0, 10_000))
def test_running_min_properties(seed):
    traj = _random_traj(seed)
    ts = np.linspace(0.0, 5.0, 1000)
    vals = traj(ts)
    for i in range(traj.n):
        m = np.array([running_min(traj, i, t) for t in ts])
        assert np.all(np.diff(m) <= 1e-15)
        assert np.all(m <= vals[:, i] + 1e-15)
        # never lower than the dense-sampled minimum by more than sampling error
        assert np.all(np.minimum.accumulate(vals[:, i]) - m >= -1e-12)


# --- first level crossing ---------------------------------------------------------


def test_first_below_examples(fixture_grid, exp_decay):
    times, found = first_below(fixture_grid, 0, [0.7, 0.6, 1.0, 0.05])
    assert found.tolist() == [True, True, True, False]
    assert times[0] == pytest.approx(0.75, abs=1e-12)
    # strict: 0.6 is reached at t = 1 but undercut only on [2, 3]
    assert times[1] == pytest.approx(2.4, abs=1e-12)
    # strict crossing of the start value: the infimum is the start time
    assert times[2] == pytest.approx(0.0, abs=1e-12)
    t, _ = first_below(exp_decay, 0, [0.5])
    assert t[0] == pytest.approx(np.log(2.0), abs=1e-10)


@given(st.integers(0, 10_000), st.floats(-2.0, 2.0))
def test_first_below_against_brute_force(seed, level):
    traj = _random_traj(seed, 1)
    times, found = first_below(traj, 0, [level])
    ts = np.linspace(0.0, 5.0, 100_001)
    below = np.flatnonzero(traj(ts)[:, 0] < level)
    if below.size == 0:
        # a tangency inside one sample cell may be missed by the grid only
        assert not found[0] or traj(times[0])[0] - level > -1e-6
    else:
        assert found[0]
        assert times[0] <= ts[below[0]] + 1e-12
        assert times[0] >= ts[max(below[0] - 1, 0)] - 1e-9


# --- histories and window suprema --------------------------------------------------


def test_window_sup_examples():
    assert window_sup(HistorySegment.constant([2.0, 3.0], 1.0)).tolist() == [2.0, 3.0]
    h_abs = HistorySegment.from_function(lambda s: [abs(s)], 1.0, 1, derivative=lambda s: [-1.0])
    assert window_sup(h_abs)[0] == pytest.approx(1.0, abs=1e-12)
    h_par = HistorySegment.from_function(lambda s: [-s * (s + 1)], 1.0, 1, derivative=lambda s: [-2 * s - 1])
    assert window_sup(h_par)[0] == pytest.approx(0.25, abs=1e-12)


@given(st.integers(0, 10_000), st.floats(0.1, 3.0))
def test_window_sup_bounds_samples(seed, r):
    traj = _random_traj(seed)
    h = HistorySegment.from_trajectory(traj, r)
    sup = window_sup(h)
    vals = h(np.linspace(-r, 0.0, 200_001))
    assert np.all(vals <= sup + 1e-12)
    assert np.all(sup - vals.max(axis=0) < 1e-6)


def test_history_domain_checks():
    h = HistorySegment.constant([1.0], 2.0)
    with pytest.raises(ValueError):
        h(0.5)
    with pytest.raises(ValueError):
        h(-2.5)
    with pytest.raises(ValueError):
        HistorySegment.from_function(lambda s: [np.nan], 1.0, 1)


@given(st.integers(0, 10_000), st.floats(0.0, 4.99))
def test_restrict_is_exact(seed, t_lo):
    traj = _random_traj(seed)
    part = traj.restrict(t_lo)
    assert part.t_start == pytest.approx(t_lo, abs=1e-12) or part.t_start == t_lo
    s = np.linspace(part.t_start, 5.0, 301)
    assert np.allclose(part(s), traj(s), rtol=0, atol=1e-9)
