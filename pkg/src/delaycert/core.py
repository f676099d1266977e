"""Vectors, componentwise orders, dense trajectories and history segments.

States are plain 1-D float arrays. Every public entry point funnels its
inputs through :func:`as_state`, which rejects NaN and infinities so that
nothing downstream is ever computed from poisoned data.

Trajectories are stored as piecewise cubic Hermite interpolants. Each
segment carries its own left and right slopes, so both integrator output
(shared node slopes) and piecewise-linear fixtures fit the same type.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

EPS_ORD = 1e-9
DEFAULT_MARGIN = 0.01


def as_state(values, n: Optional[int] = None, name: str = "state") -> np.ndarray:
    """Return `values` as a finite 1-D float array, optionally of length `n`."""
    arr = np.array(values, dtype=float).reshape(-1)
    if arr.size == 0:
        raise ValueError(f"{name} must have at least one component")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries: {arr}")
    if n is not None and arr.size != n:
        raise ValueError(f"{name} has dimension {arr.size}, expected {n}")
    return arr


def _pair(a, b):
    a = as_state(a, name="a")
    b = as_state(b, name="b")
    if a.size != b.size:
        raise ValueError(f"dimension mismatch: {a.size} vs {b.size}")
    return a, b


def cmp_leq(a, b, eps: float = EPS_ORD) -> bool:
    """``a <= b`` componentwise, with absolute slack `eps`."""
    a, b = _pair(a, b)
    return bool(np.all(a <= b + eps))


def cmp_ll(a, b, margin: float = DEFAULT_MARGIN) -> bool:
    """``a << b``: every component strictly below ``b_i - margin*max(1, |b_i|)``."""
    if margin < 0:
        raise ValueError("margin must be nonnegative")
    a, b = _pair(a, b)
    return bool(np.all(a < b - margin * np.maximum(1.0, np.abs(b))))


@dataclass(frozen=True)
class Box:
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo, hi = _pair(self.lower, self.upper)
        if np.any(lo > hi):
            raise ValueError(f"box lower {lo} exceeds upper {hi}")
        lo.flags.writeable = False
        hi.flags.writeable = False
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @classmethod
    def cube(cls, lo: float, hi: float, n: int) -> "Box":
        return cls(np.full(n, float(lo)), np.full(n, float(hi)))

    @property
    def n(self) -> int:
        return self.lower.size

    def contains(self, x, eps: float = EPS_ORD) -> bool:
        return cmp_leq(self.lower, x, eps) and cmp_leq(x, self.upper, eps)

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return rng.uniform(self.lower, self.upper, size=(size, self.n))


# --- cubic Hermite helpers ------------------------------------------------
#
# A segment on [t0, t0 + H] with end values y0, y1 and slopes m0, m1 is the
# cubic a + b s + c s^2 + d s^3 in the normalised time s = (t - t0) / H.


def hermite_coefficients(y0, y1, m0, m1, H):
    """Power-basis coefficients (a, b, c, d) in normalised time."""
    b = H * m0
    e = H * m1
    return y0, b, 3.0 * (y1 - y0) - 2.0 * b - e, 2.0 * (y0 - y1) + b + e


def _critical_points(b, c, d):
    """Roots of b + 2c s + 3d s^2 (vectorised); NaN where absent."""
    b, c, d = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (b, c, d)))
    A = 3.0 * d
    B = 2.0 * c
    C = b
    r1 = np.full(A.shape, np.nan)
    r2 = np.full(A.shape, np.nan)
    scale = np.abs(A) + np.abs(B) + np.abs(C)
    quad = np.abs(A) > 1e-14 * np.maximum(scale, 1e-300)
    lin = ~quad & (np.abs(B) > 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        disc = B * B - 4.0 * A * C
        ok = quad & (disc >= 0)
        sq = np.sqrt(np.where(ok, disc, 0.0))
        q = -0.5 * (B + np.where(B >= 0, sq, -sq))
        r1 = np.where(ok & (q != 0), q / np.where(A != 0, A, 1.0), r1)
        r2 = np.where(ok & (q != 0), C / np.where(q != 0, q, 1.0), r2)
        # q == 0 only when B == 0 and C == 0: double root at s = 0
        r1 = np.where(ok & (q == 0), 0.0, r1)
        r1 = np.where(lin, -C / np.where(B != 0, B, 1.0), r1)
    return r1, r2


def _poly(a, b, c, d, s):
    return a + s * (b + s * (c + s * d))


def cubic_range(a, b, c, d, s_lo=0.0, s_hi=1.0, ends=None):
    """Exact (min, max) of the cubic over ``[s_lo, s_hi]``, elementwise.

    `ends` optionally supplies the values at ``s_lo`` and ``s_hi`` (node
    values are exact, the power form at ``s = 1`` is not).
    """
    s_lo = np.asarray(s_lo, dtype=float)
    s_hi = np.asarray(s_hi, dtype=float)
    if ends is None:
        v_lo, v_hi = _poly(a, b, c, d, s_lo), _poly(a, b, c, d, s_hi)
    else:
        v_lo, v_hi = ends
    lo = np.minimum(v_lo, v_hi)
    hi = np.maximum(v_lo, v_hi)
    for r in _critical_points(b, c, d):
        inside = np.isfinite(r) & (r > s_lo) & (r < s_hi)
        v = _poly(a, b, c, d, np.where(inside, r, s_lo))
        lo = np.where(inside, np.minimum(lo, v), lo)
        hi = np.where(inside, np.maximum(hi, v), hi)
    return lo, hi


class DenseTrajectory:
    """Piecewise cubic Hermite trajectory on ``[t[0], t[-1]]``.

    Parameters
    ----------
    t : (N+1,) strictly increasing breakpoints
    y : (N+1, n) node values
    m0, m1 : (N, n) slopes at the left / right end of every segment
    """

    def __init__(self, t, y, m0, m1):
        t = np.asarray(t, dtype=float).reshape(-1)
        y = np.asarray(y, dtype=float)
        if y.ndim == 1:
            y = y[:, None]
        m0 = np.asarray(m0, dtype=float).reshape(len(t) - 1, y.shape[1])
        m1 = np.asarray(m1, dtype=float).reshape(len(t) - 1, y.shape[1])
        if t.size < 2:
            raise ValueError("a trajectory needs at least two breakpoints")
        if y.shape[0] != t.size:
            raise ValueError("node values do not match breakpoints")
        if np.any(np.diff(t) <= 0):
            raise ValueError("breakpoints must be strictly increasing")
        for name, arr in (("t", t), ("y", y), ("m0", m0), ("m1", m1)):
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"trajectory {name} contains non-finite entries")
            arr.flags.writeable = False
        self.t, self.y, self.m0, self.m1 = t, y, m0, m1
        self._H = np.diff(t)
        a, b, c, d = hermite_coefficients(y[:-1], y[1:], m0, m1, self._H[:, None])
        self._coef = (a, b, c, d)
        self._seg_min = None
        self._seg_max = None
        self._prefix_min = None

    @classmethod
    def from_nodes(cls, t, y, dy) -> "DenseTrajectory":
        """Hermite interpolant with one slope per node (C1 across nodes)."""
        dy = np.asarray(dy, dtype=float)
        if dy.ndim == 1:
            dy = dy[:, None]
        return cls(t, y, dy[:-1], dy[1:])

    @classmethod
    def piecewise_linear(cls, t, y) -> "DenseTrajectory":
        t = np.asarray(t, dtype=float)
        y = np.asarray(y, dtype=float)
        if y.ndim == 1:
            y = y[:, None]
        if np.any(np.diff(t) <= 0):
            raise ValueError("breakpoints must be strictly increasing")
        slope = np.diff(y, axis=0) / np.diff(t)[:, None]
        return cls(t, y, slope, slope)

    @classmethod
    def sample(cls, fn: Callable, dfn: Callable, t) -> "DenseTrajectory":
        """Interpolate a closed-form function from values and derivatives."""
        t = np.asarray(t, dtype=float)
        y = np.array([np.atleast_1d(fn(s)) for s in t], dtype=float)
        dy = np.array([np.atleast_1d(dfn(s)) for s in t], dtype=float)
        return cls.from_nodes(t, y, dy)

    @property
    def n(self) -> int:
        return self.y.shape[1]

    @property
    def t_start(self) -> float:
        return float(self.t[0])

    @property
    def t_end(self) -> float:
        return float(self.t[-1])

    @property
    def num_segments(self) -> int:
        return self.t.size - 1

    def __repr__(self):
        return (f"DenseTrajectory(n={self.n}, segments={self.num_segments}, "
                f"domain=[{self.t_start:g}, {self.t_end:g}])")

    def _locate(self, t):
        t = np.asarray(t, dtype=float)
        span = self.t_end - self.t_start
        tol = 1e-12 * max(1.0, abs(self.t_start), abs(self.t_end), span)
        if np.any(~np.isfinite(t)) or np.any(t < self.t_start - tol) or np.any(t > self.t_end + tol):
            raise ValueError(f"time outside trajectory domain [{self.t_start}, {self.t_end}]")
        t = np.clip(t, self.t_start, self.t_end)
        k = np.clip(np.searchsorted(self.t, t, side="right") - 1, 0, self.num_segments - 1)
        s = (t - self.t[k]) / self._H[k]
        return k, s

    def __call__(self, t):
        """Evaluate at a time (returns (n,)) or an array of times (returns (len, n))."""
        scalar = np.ndim(t) == 0
        k, s = self._locate(np.atleast_1d(t))
        a, b, c, d = (v[k] for v in self._coef)
        s = s[:, None]
        out = _poly(a, b, c, d, s)
        # exact node values at breakpoints
        at_node = s[:, 0] == 0.0
        out[at_node] = self.y[k[at_node]]
        at_end = s[:, 0] == 1.0
        out[at_end] = self.y[k[at_end] + 1]
        return out[0] if scalar else out

    def derivative(self, t):
        scalar = np.ndim(t) == 0
        k, s = self._locate(np.atleast_1d(t))
        _, b, c, d = (v[k] for v in self._coef)
        s = s[:, None]
        out = (b + s * (2.0 * c + 3.0 * s * d)) / self._H[k][:, None]
        return out[0] if scalar else out

    def segment_coefficients(self, k: int, i: int):
        return tuple(float(v[k, i]) for v in self._coef)

    def segment_extrema(self):
        """Per-segment exact (min, max), each of shape (N, n)."""
        if self._seg_min is None:
            lo, hi = cubic_range(*self._coef, ends=(self.y[:-1], self.y[1:]))
            lo.flags.writeable = False
            hi.flags.writeable = False
            self._seg_min, self._seg_max = lo, hi
        return self._seg_min, self._seg_max

    def prefix_min(self):
        """``prefix[k, i]`` = min of component i over segments ``0..k``."""
        if self._prefix_min is None:
            p = np.minimum.accumulate(self.segment_extrema()[0], axis=0)
            p.flags.writeable = False
            self._prefix_min = p
        return self._prefix_min

    def range_on(self, i: int, t_lo: float, t_hi: float):
        """Exact (min, max) of component `i` over ``[t_lo, t_hi]``."""
        if t_hi < t_lo:
            raise ValueError("empty interval")
        (k0,), (s0,) = self._locate([t_lo])
        (k1,), (s1,) = self._locate([t_hi])
        a, b, c, d = (v[:, i] for v in self._coef)
        if k0 == k1:
            lo, hi = cubic_range(a[k0], b[k0], c[k0], d[k0], s0, s1,
                                 ends=(self([t_lo])[0, i], self([t_hi])[0, i]))
            return float(lo), float(hi)
        lo0, hi0 = cubic_range(a[k0], b[k0], c[k0], d[k0], s0, 1.0,
                               ends=(self([t_lo])[0, i], self.y[k0 + 1, i]))
        lo1, hi1 = cubic_range(a[k1], b[k1], c[k1], d[k1], 0.0, s1, ends=(a[k1], self([t_hi])[0, i]))
        lo, hi = min(lo0, lo1), max(hi0, hi1)
        if k1 > k0 + 1:
            smin, smax = self.segment_extrema()
            lo = min(lo, smin[k0 + 1:k1, i].min())
            hi = max(hi, smax[k0 + 1:k1, i].max())
        return float(lo), float(hi)

    def restrict(self, t_lo: float) -> "DenseTrajectory":
        """The same curve on ``[t_lo, t_end]`` (a cubic piece is exact from its end data)."""
        (k,), (s,) = self._locate([t_lo])
        if s >= 1.0:
            k, s = k + 1, 0.0
        if k >= self.num_segments:
            raise ValueError("nothing left after t_lo")
        if s == 0.0:
            return DenseTrajectory(self.t[k:], self.y[k:], self.m0[k:], self.m1[k:])
        t = np.concatenate([[float(t_lo)], self.t[k + 1:]])
        y = np.concatenate([self([t_lo]), self.y[k + 1:]])
        m0 = np.concatenate([self.derivative([t_lo]), self.m0[k + 1:]])
        return DenseTrajectory(t, y, m0, self.m1[k:])

    def concat(self, other: "DenseTrajectory") -> "DenseTrajectory":
        """Join with a trajectory starting where this one ends."""
        if other.n != self.n:
            raise ValueError("dimension mismatch")
        if abs(other.t_start - self.t_end) > 1e-12 * max(1.0, abs(self.t_end)):
            raise ValueError("trajectories do not meet")
        if np.any(np.abs(other.y[0] - self.y[-1]) > 1e-12 * np.maximum(1.0, np.abs(self.y[-1]))):
            raise ValueError("trajectories disagree at the junction")
        t = np.concatenate([self.t, other.t[1:]])
        y = np.concatenate([self.y, other.y[1:]])
        return DenseTrajectory(t, y, np.concatenate([self.m0, other.m0]),
                               np.concatenate([self.m1, other.m1]))


def evaluate(traj: DenseTrajectory, t):
    return traj(t)


def running_min(traj: DenseTrajectory, i: int, t: float) -> float:
    """Minimum of component `i` over ``[t_start, t]``, exact for the interpolant."""
    if not 0 <= i < traj.n:
        raise IndexError(f"component {i} out of range")
    (k,), (s,) = traj._locate([t])
    a, b, c, d = (v[k, i] for v in traj._coef)
    part, _ = cubic_range(a, b, c, d, 0.0, s, ends=(a, traj([t])[0, i]))
    if k == 0:
        return float(part)
    return float(min(traj.prefix_min()[k - 1, i], part))


class HistorySegment:
    """Initial data on ``[-r, 0]``: a constant, a closed form, or a trajectory slice.

    Closed forms may supply `derivative`; otherwise a central difference is
    used wherever slopes are needed (Hermite resampling, window suprema).
    """

    def __init__(self, r: float, n: int, *, constant=None, func=None, derivative=None,
                 trajectory: Optional[DenseTrajectory] = None, t_ref: Optional[float] = None):
        if r < 0 or not np.isfinite(r):
            raise ValueError("history window must be finite and nonnegative")
        self.r = float(r)
        self.n = int(n)
        self._const = None if constant is None else as_state(constant, n, "constant history")
        self._func = func
        self._dfunc = derivative
        self._traj = trajectory
        self._t_ref = t_ref
        sources = sum(x is not None for x in (self._const, func, trajectory))
        if sources != 1:
            raise ValueError("history needs exactly one of constant, func, trajectory")
        if trajectory is not None:
            if trajectory.n != n:
                raise ValueError("trajectory dimension mismatch")
            self._t_ref = trajectory.t_end if t_ref is None else float(t_ref)
            if self._t_ref - self.r < trajectory.t_start - 1e-12 or self._t_ref > trajectory.t_end + 1e-12:
                raise ValueError("trajectory does not cover the history window")
        if func is not None:
            as_state(self(0.0), n, "history value")

    @classmethod
    def constant(cls, v, r: float) -> "HistorySegment":
        v = as_state(v)
        return cls(r, v.size, constant=v)

    @classmethod
    def from_function(cls, fn: Callable, r: float, n: int, derivative: Optional[Callable] = None):
        return cls(r, n, func=fn, derivative=derivative)

    @classmethod
    def from_trajectory(cls, traj: DenseTrajectory, r: float, t_ref: Optional[float] = None):
        return cls(r, traj.n, trajectory=traj, t_ref=t_ref)

    @property
    def is_constant(self) -> bool:
        return self._const is not None

    def _check(self, theta):
        theta = np.asarray(theta, dtype=float)
        if np.any(theta > 1e-12) or np.any(theta < -self.r - 1e-12 * max(1.0, self.r)):
            raise ValueError(f"history evaluated outside [-{self.r}, 0]")
        return np.clip(theta, -self.r, 0.0)

    def __call__(self, theta):
        scalar = np.ndim(theta) == 0
        th = self._check(np.atleast_1d(theta))
        if self._const is not None:
            out = np.tile(self._const, (th.size, 1))
        elif self._traj is not None:
            out = self._traj(self._t_ref + th)
        else:
            out = np.array([np.atleast_1d(self._func(s)) for s in th], dtype=float).reshape(th.size, self.n)
            if not np.all(np.isfinite(out)):
                raise ValueError("history function returned non-finite values")
        return out[0] if scalar else out

    def derivative(self, theta):
        scalar = np.ndim(theta) == 0
        th = self._check(np.atleast_1d(theta))
        if self._const is not None:
            out = np.zeros((th.size, self.n))
        elif self._traj is not None:
            out = self._traj.derivative(self._t_ref + th)
        elif self._dfunc is not None:
            out = np.array([np.atleast_1d(self._dfunc(s)) for s in th], dtype=float).reshape(th.size, self.n)
        else:
            eps = 1e-6 * max(1.0, self.r)
            lo = np.clip(th - eps, -self.r, 0.0)
            hi = np.clip(th + eps, -self.r, 0.0)
            f = lambda s: np.array([np.atleast_1d(self._func(v)) for v in s], dtype=float).reshape(s.size, self.n)
            out = (f(hi) - f(lo)) / (hi - lo)[:, None]
        return out[0] if scalar else out

    def as_trajectory(self, nodes: int = 257) -> DenseTrajectory:
        """Hermite interpolant of the history on ``[-r, 0]``."""
        if self._traj is not None and self.r > 0:
            lo, hi = self._t_ref - self.r, self._t_ref
            k0 = np.searchsorted(self._traj.t, lo, side="right")
            k1 = np.searchsorted(self._traj.t, hi, side="left")
            t = np.concatenate([[lo], self._traj.t[k0:k1], [hi]])
            t = np.unique(t)
            return DenseTrajectory.from_nodes(t - self._t_ref, self._traj(t), self._traj.derivative(t))
        r = self.r if self.r > 0 else 1.0
        theta = np.linspace(-r, 0.0, nodes if self._func is not None else 2)
        if self.r == 0:
            v = self(0.0)
            return DenseTrajectory.from_nodes(theta, np.tile(v, (theta.size, 1)), np.zeros((theta.size, self.n)))
        return DenseTrajectory.from_nodes(theta, self(theta), self.derivative(theta))


def window_sup(h: HistorySegment) -> np.ndarray:
    """Componentwise supremum of a history over ``[-r, 0]``."""
    if h.is_constant:
        return h(0.0).copy()
    if h.r == 0:
        return h(0.0)
    if h._traj is not None:
        lo = h._t_ref - h.r
        return np.array([h._traj.range_on(i, lo, h._t_ref)[1] for i in range(h.n)])
    return h.as_trajectory().segment_extrema()[1].max(axis=0)


def first_below(traj: DenseTrajectory, i: int, levels, *, strict: bool = True, sign: float = 1.0):
    """Earliest time component `i` goes below each level (``<`` or ``<=``).

    With ``sign=-1`` the question is asked of ``-y_i`` (first time above
    ``-level``). Returns ``(times, found)``; times are NaN where the level
    is never reached. The segment holding the answer is found from the
    prefix minima and split into monotone pieces at its critical points;
    the crossing is then bisected to machine precision.
    """
    if not 0 <= i < traj.n:
        raise IndexError(f"component {i} out of range")
    levels = np.atleast_1d(np.asarray(levels, dtype=float))
    lo, hi = traj.segment_extrema()
    seg = lo[:, i] if sign > 0 else -hi[:, i]
    prefix = np.minimum.accumulate(seg)
    cond = np.less if strict else np.less_equal
    v0 = sign * traj.y[0, i]
    # prefix is nonincreasing, so -prefix is sorted
    k = np.searchsorted(-prefix, -levels, side="right" if strict else "left")
    found = k < traj.num_segments
    times = np.full(levels.shape, np.nan)
    at_start = cond(v0, levels)
    times[at_start] = traj.t_start
    todo = found & ~at_start
    if np.any(todo):
        kk = k[todo]
        a, b, c, d = (sign * v[kk, i] for v in traj._coef)
        lev = levels[todo]
        r1, r2 = _critical_points(b, c, d)
        r1 = np.where(np.isfinite(r1) & (r1 > 0) & (r1 < 1), r1, 1.0)
        r2 = np.where(np.isfinite(r2) & (r2 > 0) & (r2 < 1), r2, 1.0)
        p1, p2 = np.minimum(r1, r2), np.maximum(r1, r2)
        s_lo = np.zeros_like(lev)
        s_hi = np.ones_like(lev)
        chosen = np.zeros(lev.shape, dtype=bool)
        v_end = sign * traj.y[kk + 1, i]
        for start, end in ((0.0, p1), (p1, p2), (p2, 1.0)):
            v = np.where(end == 1.0, v_end, _poly(a, b, c, d, end))
            hit = ~chosen & cond(v, lev)
            s_lo = np.where(hit, start, s_lo)
            s_hi = np.where(hit, end, s_hi)
            chosen |= hit
        piece = s_lo.copy()
        for _ in range(60):
            mid = 0.5 * (s_lo + s_hi)
            below = cond(_poly(a, b, c, d, mid), lev)
            s_hi = np.where(below, mid, s_hi)
            s_lo = np.where(below, s_lo, mid)
        # pieces are monotone, so one that starts exactly on the level has its
        # crossing at the piece start; bisection would stop short by rounding
        touch = _poly(a, b, c, d, piece) <= lev
        s_hi = np.where(touch, piece, s_hi)
        times[todo] = traj.t[kk] + s_hi * traj._H[kk]
    found = found | at_start
    return times, found
