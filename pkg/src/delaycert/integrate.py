"""Fixed-step RK4 integration with cubic Hermite dense output.

Three problems share one timeline convention: the undelayed system (forward
and backward), the delayed system under time-varying delays, and the
autonomous bounding system whose coupling sees the window supremum of the
history. The step is tied to the delay bound, ``h <= r / 20``, and is
shrunk so that the span is an integer number of steps.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence

import numpy as np

from . import _kernels as K
from .core import DenseTrajectory, HistorySegment, as_state, first_below
from .systems import ConfigurationError, DelaySignal, SystemDescriptor

OVERFLOW_GUARD = 1e12


class DivergenceError(RuntimeError):
    """Solution exceeded the overflow guard; carries the valid prefix."""

    def __init__(self, message, t_last: float, partial: Optional[DenseTrajectory]):
        super().__init__(message)
        self.t_last = t_last
        self.partial = partial


@dataclass(frozen=True)
class IntegratorConfig:
    """Step size, default horizon, convergence threshold and step budget.

    ``backend`` is ``"auto"`` (compiled loops for expression systems) or
    ``"python"`` (always the uncompiled loops, used as a cross-check).
    """
    step: float = 0.05
    horizon: float = 50.0
    delta: float = 1e-6
    max_steps: int = 20_000_000
    guard: float = OVERFLOW_GUARD
    backend: str = "auto"

    def __post_init__(self):
        if not (self.step > 0 and math.isfinite(self.step)):
            raise ConfigurationError("step must be positive")
        if self.backend not in ("auto", "python"):
            raise ConfigurationError(f"unknown backend {self.backend!r}")

    def grid(self, span: float, r: float = 0.0):
        """(h, N): largest step <= min(step, r/20) dividing `span` evenly."""
        if not span > 0:
            raise ConfigurationError("integration span must be positive")
        h0 = self.step if r <= 0 else min(self.step, r / 20.0)
        N = max(1, int(math.ceil(span / h0 - 1e-9)))
        if N > self.max_steps:
            raise ConfigurationError(f"{N} steps exceed the budget of {self.max_steps}")
        return span / N, N


@dataclass(frozen=True)
class EventSpec:
    component: int
    threshold: float
    direction: str = "downward"

    def __post_init__(self):
        if self.direction not in ("downward", "upward"):
            raise ValueError("direction must be 'downward' or 'upward'")
        if self.component < 0:
            raise ValueError("component index must be >= 0")


class BackwardRun(NamedTuple):
    trajectory: DenseTrajectory
    diverged: bool
    t_stop: float


def _span(span):
    t0, t1 = (float(v) for v in span)
    if not t1 > t0:
        raise ConfigurationError(f"empty span [{t0}, {t1}]")
    return t0, t1


def _machinery(sys: SystemDescriptor, cfg: IntegratorConfig):
    field = sys.kernel_field() if cfg.backend == "auto" else None
    if field is None:
        return sys.python_field(), {"ode": K.ode_loop, "dde": K.dde_loop, "bounding": K.bounding_loop}
    return field, K.compiled()


def _check_dim(sys, x0):
    return as_state(x0, sys.n, "initial state")


# --- undelayed system ------------------------------------------------------


def _run_ode(sys, x0, t0, span, direction, cfg):
    h, N = cfg.grid(span)
    field, loops = _machinery(sys, cfg)
    Y = np.zeros((N + 1, sys.n))
    DY = np.zeros((N + 1, sys.n))
    status, last = loops["ode"](field, float(t0), h, N, float(direction), np.ascontiguousarray(x0),
                                sys.m, cfg.guard, Y, DY)
    return h, N, int(status), int(last), Y, DY


def integrate_ode(sys: SystemDescriptor, x0, span, cfg: IntegratorConfig = IntegratorConfig()) -> DenseTrajectory:
    """Undelayed system ``y' = f(y) + G(y, y, ..., y)`` on ``span = (t0, t1)``."""
    x0 = _check_dim(sys, x0)
    t0, t1 = _span(span)
    h, N, status, last, Y, DY = _run_ode(sys, x0, t0, t1 - t0, 1.0, cfg)
    t = t0 + h * np.arange(N + 1)
    t[-1] = t1
    if status == K.DIVERGED:
        partial = DenseTrajectory.from_nodes(t[:last + 1], Y[:last + 1], DY[:last + 1]) if last > 0 else None
        raise DivergenceError(f"{sys.name}: solution left the overflow guard after t={t[last]:g}",
                              float(t[last]), partial)
    return DenseTrajectory.from_nodes(t, Y, DY)


def integrate_ode_backward(sys: SystemDescriptor, x0, span, cfg: IntegratorConfig = IntegratorConfig()) -> BackwardRun:
    """Undelayed system in reverse time on ``[-T_b, 0]`` (span given as T_b or a pair).

    Blow-up before ``-T_b`` is the expected outcome for the global
    construction, so it returns the valid part with ``diverged=True``
    rather than raising.
    """
    x0 = _check_dim(sys, x0)
    if np.ndim(span) == 0:
        t_lo, t_hi = -float(span), 0.0
    else:
        t_lo, t_hi = _span(span)
    h, N, status, last, Y, DY = _run_ode(sys, x0, t_hi, t_hi - t_lo, -1.0, cfg)
    keep = N if status == K.OK else last
    if keep < 1:
        raise DivergenceError(f"{sys.name}: backward solution blew up within one step", t_hi, None)
    t = t_hi - h * np.arange(keep + 1)
    if status == K.OK:
        t[-1] = t_lo
    traj = DenseTrajectory.from_nodes(t[::-1].copy(), Y[keep::-1].copy(), DY[keep::-1].copy())
    return BackwardRun(traj, status == K.DIVERGED, float(t[keep]))


# --- delayed systems -------------------------------------------------------


def _encode_delays(delays: Sequence[DelaySignal], horizon: float):
    enc = [d.encode(horizon) for d in delays]
    L = max(e[2].size for e in enc)
    codes = np.array([e[0] for e in enc], dtype=np.int64)
    pars = np.array([e[1] for e in enc], dtype=float)
    tabs = np.zeros((len(enc), L))
    for j, e in enumerate(enc):
        tabs[j, :e[2].size] = e[2]
    return codes, pars, tabs


def _timeline(history: HistorySegment, n: int, h: float, N: int, r: float):
    """Arrays with the history resampled on nodes ``0..K`` (Hermite, exact slopes)."""
    if history.n != n:
        raise ConfigurationError(f"history has dimension {history.n}, system {n}")
    if history.r + 1e-12 * max(1.0, r) < r:
        raise ConfigurationError(f"history covers [-{history.r}, 0] but the delay bound is {r}")
    Kh = int(math.ceil(r / h - 1e-9)) + 1
    node = -h * np.arange(Kh, -1, -1)
    node[-1] = 0.0
    # nodes older than -r continue the history linearly from its oldest point
    theta = np.maximum(node, -r)
    Y = np.zeros((Kh + N + 1, n))
    M0 = np.zeros((Kh + N + 1, n))
    M1 = np.zeros((Kh + N + 1, n))
    slope = history.derivative(theta)
    Y[:Kh + 1] = history(theta) + slope * (node - theta)[:, None]
    M0[:Kh] = slope[:-1]
    M1[:Kh] = slope[1:]
    return Kh, Y, M0, M1


def _finish(sys, t0, t1, h, N, Kh, status, last, Y, M0, M1, kind):
    if status == K.BAD_LOOKUP:
        raise ConfigurationError(f"{sys.name}: delayed lookup before the start of the history")
    end = Kh + N if status == K.OK else last
    t = t0 + h * np.arange(end - Kh + 1)
    if status == K.OK:
        t[-1] = t1
    if status == K.DIVERGED:
        partial = None
        if end > Kh:
            partial = DenseTrajectory(t, Y[Kh:end + 1].copy(), M0[Kh:end].copy(), M1[Kh:end].copy())
        raise DivergenceError(f"{sys.name}: {kind} solution left the overflow guard after t={t[-1]:g}",
                              float(t[-1]), partial)
    return DenseTrajectory(t, Y[Kh:end + 1].copy(), M0[Kh:end].copy(), M1[Kh:end].copy())


def integrate_dde(sys: SystemDescriptor, history: HistorySegment, span, cfg: IntegratorConfig = IntegratorConfig(),
                  delays: Optional[Sequence[DelaySignal]] = None) -> DenseTrajectory:
    """Delayed system ``x' = f(x) + G(x, x(t - d_1(t)), ...)`` from `history` at ``t0``.

    `delays` overrides the descriptor's signals. With ``r = 0`` the problem
    is the undelayed ODE.
    """
    if delays is not None:
        sys = sys.with_delays(delays)
    if sys.bounding:
        return integrate_bounding(sys, history, span, cfg)
    t0, t1 = _span(span)
    if sys.r == 0:
        return integrate_ode(sys, history(0.0), (t0, t1), cfg)
    h, N = cfg.grid(t1 - t0, sys.r)
    Kh, Y, M0, M1 = _timeline(history, sys.n, h, N, sys.r)
    codes, pars, tabs = _encode_delays(sys.delays, t1 + h)
    field, loops = _machinery(sys, cfg)
    status, last = loops["dde"](field, t0, h, Kh, N, Y, M0, M1, codes, pars, tabs, sys.r, cfg.guard)
    return _finish(sys, t0, t1, h, N, Kh, int(status), int(last), Y, M0, M1, "delayed")


def integrate_bounding(sys_bounding: SystemDescriptor, history: HistorySegment, span,
                       cfg: IntegratorConfig = IntegratorConfig()) -> DenseTrajectory:
    """Bounding system ``x' = f(x) + G(x, S, ..., S)``, ``S = sup_{[t-r, t]} x``."""
    sys = sys_bounding
    if not sys.bounding:
        raise ConfigurationError("integrate_bounding needs a system from make_bounding_system")
    t0, t1 = _span(span)
    if sys.r == 0:
        return integrate_ode(sys, history(0.0), (t0, t1), cfg)
    h, N = cfg.grid(t1 - t0, sys.r)
    Kh, Y, M0, M1 = _timeline(history, sys.n, h, N, sys.r)
    total = Kh + N + 1
    dq = np.zeros((sys.n, total), dtype=np.int64)
    head = np.zeros(sys.n, dtype=np.int64)
    tail = np.zeros(sys.n, dtype=np.int64)
    segmax = np.zeros((total, sys.n))
    field, loops = _machinery(sys, cfg)
    status, last = loops["bounding"](field, t0, h, Kh, N, sys.m, Y, M0, M1, sys.r, cfg.guard,
                                     dq, head, tail, segmax)
    return _finish(sys, t0, t1, h, N, Kh, int(status), int(last), Y, M0, M1, "bounding")


# --- events and export -----------------------------------------------------


def first_crossing(traj: DenseTrajectory, ev: EventSpec) -> Optional[float]:
    """Earliest time the component reaches the threshold from the near side.

    A trajectory starting on the threshold crosses at its start time. One
    starting strictly beyond it only counts once it has come back to the
    threshold and then passes it. Returns None when there is no crossing.
    The crossing is bisected on the interpolant well below 1e-10 in time.
    """
    if ev.component >= traj.n:
        raise IndexError(f"component {ev.component} out of range")
    i = ev.component
    sign = 1.0 if ev.direction == "downward" else -1.0
    level = sign * ev.threshold
    if sign * traj.y[0, i] < level:
        back, found = first_below(traj, i, [-level], strict=False, sign=-sign)
        if not found[0] or back[0] >= traj.t_end:
            return None
        traj = traj.restrict(float(back[0]))
        times, found = first_below(traj, i, [level], strict=True, sign=sign)
    else:
        times, found = first_below(traj, i, [level], strict=False, sign=sign)
    return float(times[0]) if found[0] else None


def write_csv(path, traj: DenseTrajectory) -> None:
    """One row per breakpoint, header ``t,x_1,...,x_n``, 17 significant digits."""
    header = ",".join(["t"] + [f"x_{i + 1}" for i in range(traj.n)])
    data = np.column_stack([traj.t, traj.y])
    np.savetxt(path, data, delimiter=",", header=header, comments="", fmt="%.17g")


def trajectory_to_csv_text(traj: DenseTrajectory) -> str:
    rows = [",".join(["t"] + [f"x_{i + 1}" for i in range(traj.n)])]
    rows += [",".join(f"{v:.17g}" for v in row) for row in np.column_stack([traj.t, traj.y])]
    return "\n".join(rows) + "\n"
