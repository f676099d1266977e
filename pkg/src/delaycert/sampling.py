"""Reproducible random inputs: histories, ordered history pairs and delay signals.

Every draw comes from ``np.random.default_rng([seed, stream, index])`` so a
trial can be replayed from its (seed, stream, index) triple alone, in any
order and in parallel.
"""
from __future__ import annotations

from typing import Sequence

import numpy as np

from .core import DenseTrajectory, HistorySegment, as_state
from .systems import DelaySignal

# stream identifiers
SWEEP = 1
LEVEL_SET = 2
ORDER_PAIRS = 3
DOMINATION = 4
ESCAPE = 5
LEVEL_SIM = 6

HISTORY_NODES = 6


def trial_rng(seed: int, stream: int, index: int) -> np.random.Generator:
    return np.random.default_rng([int(seed), int(stream), int(index)])


def _history_from_nodes(values: np.ndarray, r: float) -> HistorySegment:
    if r == 0:
        return HistorySegment.constant(values[-1], 0.0)
    theta = np.linspace(-r, 0.0, values.shape[0])
    # zero end slopes keep every segment between its two node values
    traj = DenseTrajectory.from_nodes(theta, values, np.zeros_like(values))
    return HistorySegment.from_trajectory(traj, r)


def random_history(rng: np.random.Generator, lower, upper, r: float, nodes: int = HISTORY_NODES) -> HistorySegment:
    """Smooth history with values inside the box ``[lower, upper]``.

    Node values are uniform in the box, except that with probability 1/4
    the history is constant and with probability 1/4 it ends on a random
    face of the box (the extreme cases a certificate has to survive).
    """
    lower = as_state(lower)
    upper = as_state(upper, lower.size)
    u = rng.random((nodes, lower.size))
    mode = rng.integers(4)
    if mode == 0:
        u[:] = u[-1]
    elif mode == 1:
        u[-1] = rng.integers(0, 2, lower.size)
    return _history_from_nodes(lower + u * (upper - lower), r)


def ordered_history_pair(rng: np.random.Generator, lower, upper, r: float, nodes: int = HISTORY_NODES):
    """Histories ``phi <= psi`` pointwise, both inside ``[lower, upper]``."""
    lower = as_state(lower)
    upper = as_state(upper, lower.size)
    a = rng.random((nodes, lower.size))
    b = rng.random((nodes, lower.size))
    lo, hi = np.minimum(a, b), np.maximum(a, b)
    # pin one component at t = 0 so the pair also probes the tie case
    if rng.random() < 0.5:
        i = rng.integers(lower.size)
        hi[-1, i] = lo[-1, i]
    span = upper - lower
    # both histories share node times and zero slopes: order holds between nodes too
    return (_history_from_nodes(lower + lo * span, r), _history_from_nodes(lower + hi * span, r))


def random_delay(rng: np.random.Generator, r: float, kind: str = "sinusoidal") -> DelaySignal:
    """A delay signal with values in ``[0, r]``.

    Random switching periods are at least ``r / 10``, which is at least two
    integrator steps under the ``h <= r / 20`` rule.
    """
    if r == 0:
        return DelaySignal.constant(0.0, 0.0)
    if kind == "sinusoidal":
        lo, hi = np.sort(rng.uniform(0.0, r, 2))
        return DelaySignal.sinusoidal(r, 0.5 * (lo + hi), 0.5 * (hi - lo), rng.uniform(0.02, 2.0),
                                      rng.uniform(0.0, 2 * np.pi))
    if kind in ("random", "piecewise-constant-random"):
        return DelaySignal.random(r, int(rng.integers(2 ** 31)), rng.uniform(r / 10.0, 2.0 * r))
    if kind == "constant":
        return DelaySignal.constant(rng.uniform(0.0, r), r)
    raise ValueError(f"unknown delay kind {kind!r}")


def random_delays(rng: np.random.Generator, m: int, r: float, kind: str) -> tuple:
    return tuple(random_delay(rng, r, kind) for _ in range(m))


def sweep_inputs(seed: int, stream: int, index: int, lower, upper, r: float, m: int,
                 kinds: Sequence[str] = ("sinusoidal", "random")):
    """History and delay signals of one sweep trial (delay kinds alternate by index)."""
    rng = trial_rng(seed, stream, index)
    kind = kinds[index % len(kinds)]
    history = random_history(rng, lower, upper, r)
    return history, random_delays(rng, m, r, kind), kind
