"""System descriptors for ``x' = f(x(t)) + G(x(t), x(t - d_1(t)), ..., x(t - d_m(t)))``.

The delayed coupling is restricted to finitely many point delays. With that
restriction ``G(v, v, ..., v)`` never depends on time, which is exactly the
constant-argument invariance the comparison arguments rely on.

Systems are usually described by expression strings (see :mod:`delaycert.expr`);
those are compiled once to vectorised numpy callables and to a numba kernel
field. Plain Python callables are accepted as well and run through the
slower pure-Python integrator path.
"""
from __future__ import annotations

import functools
import hashlib
import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np

from . import expr as ex
from .core import EPS_ORD, Box, HistorySegment, as_state, window_sup

try:  # Python 3.11+
    import tomllib
except ModuleNotFoundError:  # pragma: no cover - exercised on 3.10
    import tomli as tomllib


class ConfigurationError(ValueError):
    """Invalid system or run configuration (bad delays, bad file, ...)."""


# --- delay signals --------------------------------------------------------

DELAY_KINDS = ("constant", "sinusoidal", "piecewise-constant-random")
_KIND_ALIASES = {"random": "piecewise-constant-random", "sine": "sinusoidal", "sin": "sinusoidal"}


@dataclass(frozen=True)
class DelaySignal:
    """A delay ``d(t)`` with ``0 <= d(t) <= r``.

    constant:                  ``value``
    sinusoidal:                ``mean + amplitude * sin(2 pi frequency t + phase)``
    piecewise-constant-random: uniform on ``[low, high]`` (default ``[0, r]``),
                               redrawn every ``period`` time units from ``seed``
    """
    kind: str
    params: tuple
    r: float

    def __init__(self, kind: str, r: float, **params):
        kind = _KIND_ALIASES.get(kind, kind)
        if kind not in DELAY_KINDS:
            raise ConfigurationError(f"unknown delay kind {kind!r}")
        if kind == "sinusoidal":
            params.setdefault("phase", 0.0)
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "r", float(r))
        object.__setattr__(self, "params", tuple(sorted(params.items())))
        self._validate()

    @classmethod
    def constant(cls, value: float, r: Optional[float] = None):
        return cls("constant", value if r is None else r, value=float(value))

    @classmethod
    def sinusoidal(cls, r, mean, amplitude, frequency, phase=0.0):
        return cls("sinusoidal", r, mean=float(mean), amplitude=float(amplitude),
                   frequency=float(frequency), phase=float(phase))

    @classmethod
    def random(cls, r, seed: int, period: float, low: float = 0.0, high: Optional[float] = None):
        return cls("piecewise-constant-random", r, seed=int(seed), period=float(period),
                   low=float(low), high=float(r if high is None else high))

    @property
    def p(self) -> dict:
        return dict(self.params)

    def _validate(self):
        p, r = self.p, self.r
        if not (np.isfinite(r) and r >= 0):
            raise ConfigurationError("delay bound must be finite and >= 0")
        tol = 1e-12 * max(1.0, r)
        missing = {"constant": {"value"}, "sinusoidal": {"mean", "amplitude", "frequency"},
                   "piecewise-constant-random": {"seed", "period"}}[self.kind] - set(p)
        if missing:
            raise ConfigurationError(f"{self.kind} delay needs {sorted(missing)}")
        if self.kind == "constant":
            lo = hi = p["value"]
        elif self.kind == "sinusoidal":
            lo, hi = p["mean"] - abs(p["amplitude"]), p["mean"] + abs(p["amplitude"])
            if p["frequency"] < 0:
                raise ConfigurationError("frequency must be >= 0")
        else:
            lo, hi = p.get("low", 0.0), p.get("high", r)
            if p["period"] <= 0:
                raise ConfigurationError("switch period must be positive")
        if lo < -tol or hi > r + tol:
            raise ConfigurationError(f"{self.kind} delay leaves [0, {r}]: range [{lo}, {hi}]")

    def _table(self, count: int) -> np.ndarray:
        p = self.p
        rng = np.random.default_rng(p["seed"])
        return rng.uniform(p.get("low", 0.0), p.get("high", self.r), size=count)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        p = self.p
        if self.kind == "constant":
            d = np.full(t.shape, p["value"])
        elif self.kind == "sinusoidal":
            d = p["mean"] + p["amplitude"] * np.sin(2 * np.pi * p["frequency"] * t + p["phase"])
        else:
            k = np.maximum(np.floor(t / p["period"]), 0).astype(int)
            d = self._table(int(k.max(initial=0)) + 1)[k]
        return np.clip(d, 0.0, self.r)

    def encode(self, horizon: float):
        """(code, params[4], table) for the compiled integrators."""
        p = self.p
        if self.kind == "constant":
            return 0, np.array([p["value"], 0, 0, 0.0]), np.zeros(1)
        if self.kind == "sinusoidal":
            return 1, np.array([p["mean"], p["amplitude"], 2 * np.pi * p["frequency"], p["phase"]]), np.zeros(1)
        count = int(math.ceil(max(horizon, 0.0) / p["period"])) + 2
        return 2, np.array([p["period"], 0, 0, 0.0]), self._table(count)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "params": self.p}


def delay_from_dict(spec: dict, r: float) -> DelaySignal:
    spec = dict(spec)
    kind = spec.pop("kind", None)
    params = spec.pop("params", {})
    params.update(spec)
    if kind is None:
        raise ConfigurationError("delay entry needs a 'kind'")
    try:
        return DelaySignal(kind, r, **params)
    except TypeError as err:
        raise ConfigurationError(f"bad delay parameters {params}: {err}") from None


# --- descriptors ----------------------------------------------------------


@dataclass(frozen=True)
class SystemDescriptor:
    """Instantaneous field `f`, delayed coupling `g`, delays and equilibrium.

    `f(x)` maps ``(..., n) -> (..., n)`` and `g(x, z)` maps ``(..., n), (..., m, n)``
    to ``(..., n)`` where ``z[..., j, :]`` is the state delayed by ``d_j``.
    Callables with ``vectorized=False`` receive single states only.
    """
    name: str
    n: int
    r: float
    f: Callable
    g: Callable
    delays: tuple
    equilibrium: Optional[np.ndarray] = None
    f_expr: Optional[tuple] = None
    g_expr: Optional[tuple] = None
    g_delay: Optional[tuple] = None
    bounding: bool = False
    vectorized: bool = True
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.n < 1:
            raise ConfigurationError("dimension must be >= 1")
        if not (np.isfinite(self.r) and self.r >= 0):
            raise ConfigurationError("delay bound r must be finite and >= 0")
        if len(self.delays) < 1:
            raise ConfigurationError("at least one delay signal is required (use constant 0 for r = 0)")
        for d in self.delays:
            if d.r > self.r + 1e-12 * max(1.0, self.r):
                raise ConfigurationError(f"delay bound {d.r} exceeds system bound {self.r}")
        if self.equilibrium is not None:
            eq = as_state(self.equilibrium, self.n, "equilibrium")
            eq.flags.writeable = False
            object.__setattr__(self, "equilibrium", eq)
            res = eval_undelayed_field(self, eq)
            if np.any(np.abs(res) > EPS_ORD * max(1.0, float(np.abs(eq).max()))):
                raise ConfigurationError(f"declared equilibrium {eq} has residual {res}")

    @property
    def m(self) -> int:
        return len(self.delays)

    @property
    def has_expressions(self) -> bool:
        return self.f_expr is not None and self.g_expr is not None

    def with_delays(self, delays: Sequence[DelaySignal], r: Optional[float] = None) -> "SystemDescriptor":
        delays = tuple(delays)
        if len(delays) != self.m:
            raise ConfigurationError(f"system uses {self.m} delays, got {len(delays)}")
        return replace(self, delays=delays, r=self.r if r is None else float(r))

    def describe(self) -> dict:
        d = {"name": self.name, "dimension": self.n, "r": self.r,
             "delays": [s.to_dict() for s in self.delays], "bounding": self.bounding}
        if self.has_expressions:
            d["f"] = [ex.to_text(e) for e in self.f_expr]
            d["g"] = [ex.to_text(e) for e in self.g_expr]
            d["g_delay"] = [j + 1 for j in self.g_delay]
        if self.equilibrium is not None:
            d["equilibrium"] = self.equilibrium.tolist()
        return d

    def digest(self) -> str:
        payload = json.dumps(self.describe(), sort_keys=True)
        return hashlib.sha256(payload.encode()).hexdigest()[:16]

    def kernel_field(self):
        """Compiled ``field(t, x, z, out)`` for the numba integrators, or None."""
        if not self.has_expressions:
            return None
        return _compile_kernel_field(_kernel_source(self))

    def python_field(self):
        def field_fn(t, x, z, out):
            out[:] = _f1(self, x) + _g1(self, x, z)
        return field_fn


def _f1(sys, x):
    return np.asarray(sys.f(x), dtype=float)


def _g1(sys, x, z):
    return np.asarray(sys.g(x, z), dtype=float)


def _batch_f(sys, X):
    if sys.vectorized:
        return np.asarray(sys.f(X), dtype=float)
    return np.array([_f1(sys, x) for x in X.reshape(-1, sys.n)]).reshape(X.shape)


def _batch_g(sys, X, Z):
    if sys.vectorized:
        return np.asarray(sys.g(X, Z), dtype=float)
    flat_x = X.reshape(-1, sys.n)
    flat_z = Z.reshape(-1, sys.m, sys.n)
    return np.array([_g1(sys, x, z) for x, z in zip(flat_x, flat_z)]).reshape(X.shape)


# --- expression compilation -----------------------------------------------


def _vec_var(row_delay):
    def render(v):
        if v.kind == "x":
            return f"x[..., {v.index - 1}]"
        return f"z[..., {row_delay}, {v.index - 1}]"
    return render


def _build_vector_fn(exprs, args, delays=None):
    lines = [f"def fn({args}):", "    shape = x.shape[:-1]", "    return _np.stack(["]
    for i, e in enumerate(exprs):
        src = ex.to_python(e, _vec_var(0 if delays is None else delays[i]))
        lines.append(f"        _np.broadcast_to({src}, shape),")
    lines.append("    ], axis=-1)")
    ns = {"_np": np}
    with np.errstate(all="ignore"):
        exec("\n".join(lines), ns)
    fn = ns["fn"]

    def guarded(*a):
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            return fn(*(np.asarray(v, dtype=float) for v in a))
    return guarded


def _kernel_source(sys) -> str:
    lines = ["def field(t, x, z, out):"]
    for i, (fe, ge) in enumerate(zip(sys.f_expr, sys.g_expr)):
        j = sys.g_delay[i]

        def render(v, j=j):
            return f"x[{v.index - 1}]" if v.kind == "x" else f"z[{j}, {v.index - 1}]"
        lines.append(f"    out[{i}] = {ex.to_python(fe, render)} + {ex.to_python(ge, render)}")
    return "\n".join(lines)


@functools.lru_cache(maxsize=None)
def _compile_kernel_field(source: str):
    from ._kernels import compile_field
    return compile_field(source)


def from_expressions(name: str, f: Sequence[str], g: Sequence[str], r: float,
                     delays: Sequence[DelaySignal], equilibrium=None,
                     g_delay: Optional[Sequence[int]] = None, meta: Optional[dict] = None,
                     bounding: bool = False) -> SystemDescriptor:
    """Build a descriptor from expression strings (or parsed trees).

    `g_delay` gives, for every equation, the 0-based index of the delay that
    its ``z`` variables refer to. Default: delay ``i`` for equation ``i``
    when there are as many delays as equations, else delay 0.
    """
    f_expr = tuple(e if not isinstance(e, str) else ex.parse(e) for e in f)
    g_expr = tuple(e if not isinstance(e, str) else ex.parse(e) for e in g)
    n = len(f_expr)
    if len(g_expr) != n:
        raise ConfigurationError(f"f has {n} components but g has {len(g_expr)}")
    m = len(delays)
    if g_delay is None:
        g_delay = tuple(range(n)) if m == n else (0,) * n
    g_delay = tuple(int(j) for j in g_delay)
    if len(g_delay) != n or any(not 0 <= j < m for j in g_delay):
        raise ConfigurationError(f"g_delay {g_delay} invalid for {m} delays")
    for e in f_expr + g_expr:
        for kind, idx in ex.variables(e):
            if idx > n:
                raise ConfigurationError(f"variable {kind}{idx} exceeds dimension {n}")
    for e in f_expr:
        if any(kind == "z" for kind, _ in ex.variables(e)):
            raise ConfigurationError("delayed variables z<k> may only appear in g")
    fv = _build_vector_fn(f_expr, "x")
    gv = _build_vector_fn(g_expr, "x, z", g_delay)
    return SystemDescriptor(name=name, n=n, r=float(r), f=fv, g=gv, delays=tuple(delays),
                            equilibrium=equilibrium, f_expr=f_expr, g_expr=g_expr,
                            g_delay=g_delay, bounding=bounding, meta=dict(meta or {}))


# --- field evaluation -----------------------------------------------------


def eval_undelayed_field(sys: SystemDescriptor, x) -> np.ndarray:
    """``f(x) + G(x, x, ..., x)``."""
    x = as_state(x, sys.n)
    z = np.tile(x, (sys.m, 1))
    out = _f1(sys, x) + _g1(sys, x, z)
    if not np.all(np.isfinite(out)):
        raise FloatingPointError(f"non-finite field value at {x}: {out}")
    return out


def batch_undelayed_field(sys: SystemDescriptor, X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    Z = np.repeat(X[..., None, :], sys.m, axis=-2)
    return _batch_f(sys, X) + _batch_g(sys, X, Z)


def eval_delayed_field(sys: SystemDescriptor, t: float, h: HistorySegment) -> np.ndarray:
    """``f(h(0)) + G(h(0), h(-d_1(t)), ..., h(-d_m(t)))``; window supremum for bounding systems."""
    if h.n != sys.n:
        raise ConfigurationError("history dimension mismatch")
    if h.r + 1e-12 < sys.r:
        raise ConfigurationError(f"history window {h.r} shorter than delay bound {sys.r}")
    x0 = h(0.0)
    if sys.bounding:
        z = np.tile(window_sup(h), (sys.m, 1))
    else:
        lags = np.array([float(d(t)) for d in sys.delays])
        if np.any(lags > sys.r + 1e-12 * max(1.0, sys.r)) or np.any(lags < 0):
            raise ConfigurationError(f"delay values {lags} outside [0, {sys.r}]")
        z = h(-lags)
    out = _f1(sys, x0) + _g1(sys, x0, z)
    if not np.all(np.isfinite(out)):
        raise FloatingPointError(f"non-finite field value: {out}")
    return out


# --- sampled validators ---------------------------------------------------


@dataclass
class MonotonicityReport:
    samples: int
    violations: list
    count: int = 0

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_dict(self):
        return {"samples": self.samples, "violation_count": self.count,
                "violations": self.violations}


@dataclass
class SubhomogeneityReport:
    alpha: float
    samples: int
    violations: list
    count: int = 0

    @property
    def ok(self) -> bool:
        return not self.violations

    def parts(self) -> set:
        return {v["part"] for v in self.violations}

    def to_dict(self):
        return {"alpha": self.alpha, "samples": self.samples,
                "violation_count": self.count, "violations": self.violations}


def _ordered_pairs(rng, box: Box, size, extra_shape=()):
    lo = np.broadcast_to(box.lower, extra_shape + (box.n,))
    hi = np.broadcast_to(box.upper, extra_shape + (box.n,))
    a = rng.uniform(lo, hi, size=(size,) + extra_shape + (box.n,))
    b = a + rng.uniform(0.0, 1.0, size=a.shape) * (hi - a)
    # exact ties are where order conditions bite hardest
    tie = rng.random(a.shape) < 0.2
    return a, np.where(tie, a, b)


def _record(violations, limit, items):
    for item in items:
        if len(violations) >= limit:
            break
        violations.append(item)


def check_quasimonotonicity(sys: SystemDescriptor, trials: int, domain: Box, seed: int = 0,
                            max_witnesses: int = 10) -> MonotonicityReport:
    """Sampled falsifier for the Kamke conditions on f, on G, and on the full delayed field.

    Each trial draws ordered states with one pinned equal component (for f),
    ordered current/delayed samples (for G), and ordered history samples
    with equal pinned current component (for the combined field).
    Violations carry the witnessing points and the trial index.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if domain.n != sys.n:
        raise ConfigurationError("domain dimension mismatch")
    rng = np.random.default_rng([seed, 101])
    n, m = sys.n, sys.m
    tol = EPS_ORD

    x, y = _ordered_pairs(rng, domain, trials)
    pin = rng.integers(0, n, size=trials)
    rows = np.arange(trials)
    y[rows, pin] = x[rows, pin]
    fx, fy = _batch_f(sys, x), _batch_f(sys, y)
    a = fx[rows, pin]
    b = fy[rows, pin]
    bad = a > b + tol * np.maximum(1.0, np.abs(b))

    zx, zy = _ordered_pairs(rng, domain, trials, (m,))
    x2, y2 = _ordered_pairs(rng, domain, trials)
    gx, gy = _batch_g(sys, x2, zx), _batch_g(sys, y2, zy)
    gbad = gx > gy + tol * np.maximum(1.0, np.abs(gy))

    x3, y3 = _ordered_pairs(rng, domain, trials)
    zx3, zy3 = _ordered_pairs(rng, domain, trials, (m,))
    pin3 = rng.integers(0, n, size=trials)
    y3[rows, pin3] = x3[rows, pin3]
    hx = _batch_f(sys, x3) + _batch_g(sys, x3, zx3)
    hy = _batch_f(sys, y3) + _batch_g(sys, y3, zy3)
    a3, b3 = hx[rows, pin3], hy[rows, pin3]
    hbad = a3 > b3 + tol * np.maximum(1.0, np.abs(b3))

    violations = []
    _record(violations, max_witnesses, (
        {"condition": "f", "trial": int(k), "component": int(pin[k]), "x": x[k].tolist(),
         "y": y[k].tolist(), "f_x": float(a[k]), "f_y": float(b[k])}
        for k in np.flatnonzero(bad)))
    for k, i in zip(*np.nonzero(gbad)):
        if len(violations) >= max_witnesses:
            break
        violations.append({"condition": "g", "trial": int(k), "component": int(i),
                           "x": x2[k].tolist(), "y": y2[k].tolist(),
                           "z_x": zx[k].tolist(), "z_y": zy[k].tolist(),
                           "g_x": float(gx[k, i]), "g_y": float(gy[k, i])})
    _record(violations, max_witnesses, (
        {"condition": "appmon", "trial": int(k), "component": int(pin3[k]),
         "phi0": x3[k].tolist(), "psi0": y3[k].tolist(), "phi_delayed": zx3[k].tolist(),
         "psi_delayed": zy3[k].tolist(), "field_phi": float(a3[k]), "field_psi": float(b3[k])}
        for k in np.flatnonzero(hbad)))
    count = int(bad.sum() + gbad.any(axis=1).sum() + hbad.sum())
    return MonotonicityReport(samples=trials, violations=violations, count=count)


def check_subhomogeneity(sys: SystemDescriptor, alpha: float, trials: int, domain: Box,
                         seed: int = 0, lam_max: float = 10.0,
                         max_witnesses: int = 10) -> SubhomogeneityReport:
    """Sampled falsifier for ``f(lam x) <= lam^alpha f(x)`` and the same for G on constant histories."""
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng([seed, 202])
    lo = np.maximum(domain.lower, 0.0)
    hi = np.maximum(domain.upper, lo)
    x = rng.uniform(lo, hi, size=(trials, sys.n))
    v = rng.uniform(lo, hi, size=(trials, sys.n))
    lam = np.exp(rng.uniform(0.0, np.log(lam_max), size=trials))[:, None]
    scale = lam ** alpha

    lhs_f = _batch_f(sys, lam * x)
    rhs_f = scale * _batch_f(sys, x)
    zv = np.repeat(v[:, None, :], sys.m, axis=1)
    lhs_g = _batch_g(sys, lam * v, lam[:, :, None] * zv)
    rhs_g = scale * _batch_g(sys, v, zv)

    tol = EPS_ORD
    fbad = lhs_f > rhs_f + tol * np.maximum(1.0, np.abs(rhs_f))
    gbad = lhs_g > rhs_g + tol * np.maximum(1.0, np.abs(rhs_g))
    violations = []
    for part, bad, pts, lhs, rhs in (("f", fbad, x, lhs_f, rhs_f), ("g", gbad, v, lhs_g, rhs_g)):
        for k, i in zip(*np.nonzero(bad)):
            if len(violations) >= max_witnesses:
                break
            violations.append({"part": part, "trial": int(k), "component": int(i),
                               "lambda": float(lam[k, 0]), "point": pts[k].tolist(),
                               "lhs": float(lhs[k, i]), "rhs": float(rhs[k, i])})
    count = int(fbad.any(axis=1).sum() + gbad.any(axis=1).sum())
    return SubhomogeneityReport(alpha=float(alpha), samples=trials, violations=violations, count=count)


# --- transforms -----------------------------------------------------------


def shift_to_origin(sys: SystemDescriptor, direction: str = "above") -> SystemDescriptor:
    """Move the equilibrium to the origin.

    ``above``: ``u = x - x*`` with ``f~(u) = f(x* + u)``, ``g~(u, w) = G(x* + u, x* + w)``.
    ``below``: ``u = x* - x`` with ``f~(u) = -f(x* - u)``, ``g~(u, w) = -G(x* - u, x* - w)``.
    Both transformed systems inherit the order conditions of the original.
    """
    if sys.equilibrium is None:
        raise ConfigurationError(f"system {sys.name!r} has no declared equilibrium")
    if direction not in ("above", "below"):
        raise ValueError("direction must be 'above' or 'below'")
    xs = sys.equilibrium.copy()
    sgn = 1.0 if direction == "above" else -1.0
    name = f"{sys.name}[{direction}]"
    meta = {k: v for k, v in sys.meta.items() if k in ("horizon", "delta")}
    meta["shifted_from"] = sys.name
    if sys.has_expressions:
        def shifted(e):
            mapping = {}
            for kind, idx in ex.variables(e):
                c = ex.Num(float(xs[idx - 1]))
                v = ex.Var(kind, idx)
                mapping[(kind, idx)] = ex.Bin("+" if sgn > 0 else "-", c, v)
            out = ex.substitute(e, mapping)
            return out if sgn > 0 else ex.Neg(out)
        f_expr = tuple(shifted(e) for e in sys.f_expr)
        g_expr = tuple(shifted(e) for e in sys.g_expr)
        return from_expressions(name, f_expr, g_expr, sys.r, sys.delays,
                                equilibrium=np.zeros(sys.n), g_delay=sys.g_delay, meta=meta,
                                bounding=sys.bounding)
    f0, g0 = sys.f, sys.g

    def f(u):
        return sgn * np.asarray(f0(xs + sgn * np.asarray(u)), dtype=float)

    def g(u, w):
        return sgn * np.asarray(g0(xs + sgn * np.asarray(u), xs + sgn * np.asarray(w)), dtype=float)
    return SystemDescriptor(name=name, n=sys.n, r=sys.r, f=f, g=g, delays=sys.delays,
                            equilibrium=np.zeros(sys.n), bounding=sys.bounding,
                            vectorized=sys.vectorized, meta=meta)


def make_bounding_system(sys: SystemDescriptor) -> SystemDescriptor:
    """Autonomous comparison system: G evaluated at the window supremum of the history."""
    return replace(sys, name=f"{sys.name}[bounding]", bounding=True)


# --- catalog --------------------------------------------------------------


def example15(r: float = 1.0, kappa: float = 2.0, delays: Optional[Sequence[DelaySignal]] = None):
    """Planar monotone system with saturating couplings; two independent delays."""
    if delays is None:
        delays = (DelaySignal.sinusoidal(r, 0.5 * r, 0.5 * r, 0.37),
                  DelaySignal.sinusoidal(r, 0.5 * r, 0.5 * r, 0.23, 1.0))
    y0 = [(3 * kappa ** 2 - 1) / (kappa ** 2 + 1), kappa]
    meta = {"y0": y0, "v": [1.0, 1.0], "kappa": kappa, "domain": [[0, 0], [5, 5]], "horizon": 15000.0,
            "simulate_horizon": 2000.0,
            "delta": 1e-4, "escape": {"component": 0, "threshold": 1.5, "rate": 0.5},
            "subhomogeneous": False}
    return from_expressions(
        "example15",
        f=["-x1", "-2*x2^2/(x2^2+1)"],
        g=["z2^2/(z2^2+1)", "z1"],
        r=r, delays=delays, equilibrium=[0.0, 0.0], g_delay=(0, 1), meta=meta)


LINEAR_A = np.array([[-2.0, 0.5], [0.5, -2.0]])
LINEAR_B = np.full((2, 2), 0.5)


def linear_positive(r: float = 1.0, delays: Optional[Sequence[DelaySignal]] = None):
    """``x' = A x(t) + B x(t - d)`` with A Metzler, B >= 0 and A + B Hurwitz."""
    if delays is None:
        delays = (DelaySignal.sinusoidal(r, 0.5 * r, 0.5 * r, 0.31),
                  DelaySignal.sinusoidal(r, 0.5 * r, 0.4 * r, 0.17, 2.0))
    A, B = LINEAR_A, LINEAR_B
    f = [" + ".join(f"{float(A[i, j])!r}*x{j + 1}" for j in range(2)) for i in range(2)]
    g = [" + ".join(f"{float(B[i, j])!r}*z{j + 1}" for j in range(2)) for i in range(2)]
    meta = {"y0": [5.0, 5.0], "y0_global": [1.0, 1.0], "v": [1.0, 1.0], "domain": [[0, 0], [5, 5]], "delta": 1e-6, "horizon": 200.0,
            "subhomogeneous": True,
            "backward_divergent": True}
    return from_expressions("linear", f, g, r=r, delays=delays, equilibrium=[0.0, 0.0], meta=meta)


def scalar_shifted(r: float = 1.0, delays: Optional[Sequence[DelaySignal]] = None):
    """``x' = 1 - 2 x(t) + x(t - d)`` with equilibrium 1."""
    if delays is None:
        delays = (DelaySignal.sinusoidal(r, 0.5 * r, 0.5 * r, 0.29),)
    meta = {"y0": [1.8], "y_upper": [1.8], "y_lower": [0.2], "domain": [[0], [3]], "delta": 1e-4}
    return from_expressions("shifted", ["1 - 2*x1"], ["z1"], r=r, delays=delays,
                            equilibrium=[1.0], meta=meta)


CATALOG = {
    "example15": example15,
    "linear": linear_positive,
    "shifted": scalar_shifted,
}


def catalog_system(name: str, **kwargs) -> SystemDescriptor:
    try:
        return CATALOG[name](**kwargs)
    except KeyError:
        raise ConfigurationError(f"unknown catalog system {name!r}; known: {sorted(CATALOG)}") from None


def domain_box(sys: SystemDescriptor) -> Box:
    if "domain" in sys.meta:
        lo, hi = sys.meta["domain"]
        return Box(np.array(lo, dtype=float), np.array(hi, dtype=float))
    base = np.zeros(sys.n) if sys.equilibrium is None else sys.equilibrium
    return Box(base, base + 5.0)


# --- system definition files ----------------------------------------------


def system_from_mapping(data: dict, name: str = "user") -> SystemDescriptor:
    """Build a system from the keys of a definition file.

    Keys: ``dimension``, ``r``, ``f``, ``g``, ``delays``, optional
    ``equilibrium``, ``g_delay`` (1-based), ``name`` and ``meta``.
    """
    try:
        n = int(data["dimension"])
        r = float(data["r"])
        f, g = list(data["f"]), list(data["g"])
    except KeyError as err:
        raise ConfigurationError(f"system definition is missing key {err}") from None
    if len(f) != n or len(g) != n:
        raise ConfigurationError(f"expected {n} expressions in f and g")
    delays = [delay_from_dict(d, r) for d in data.get("delays", [{"kind": "constant", "value": 0.0}])]
    g_delay = data.get("g_delay")
    if g_delay is not None:
        g_delay = [int(j) - 1 for j in g_delay]
    try:
        return from_expressions(data.get("name", name), f, g, r, delays,
                                equilibrium=data.get("equilibrium"), g_delay=g_delay,
                                meta=dict(data.get("meta", {})))
    except ex.ExprError as err:
        raise ConfigurationError(str(err)) from None


def load_system(path) -> SystemDescriptor:
    path = Path(path)
    try:
        data = tomllib.loads(path.read_text())
    except (OSError, tomllib.TOMLDecodeError) as err:
        raise ConfigurationError(f"cannot read system file {path}: {err}") from None
    return system_from_mapping(data.get("system", data), name=path.stem)


def dump_system(sys: SystemDescriptor) -> str:
    """TOML text for an expression system (round-trips through :func:`load_system`)."""
    if not sys.has_expressions:
        raise ConfigurationError("only expression systems can be serialised")

    def q(s):
        return json.dumps(s)
    lines = [f"name = {q(sys.name)}", f"dimension = {sys.n}", f"r = {sys.r!r}",
             "f = [" + ", ".join(q(ex.to_text(e)) for e in sys.f_expr) + "]",
             "g = [" + ", ".join(q(ex.to_text(e)) for e in sys.g_expr) + "]",
             "g_delay = [" + ", ".join(str(j + 1) for j in sys.g_delay) + "]"]
    if sys.equilibrium is not None:
        lines.append("equilibrium = [" + ", ".join(repr(float(v)) for v in sys.equilibrium) + "]")
    for d in sys.delays:
        lines += ["", "[[delays]]", f"kind = {q(d.kind)}"]
        lines += [f"{k} = {v!r}" for k, v in d.p.items()]
    return "\n".join(lines) + "\n"


def resolve_system(spec: str, **kwargs) -> SystemDescriptor:
    """Catalog name or path to a system definition file."""
    if spec in CATALOG:
        return catalog_system(spec, **kwargs)
    path = Path(spec)
    if path.exists():
        return load_system(path)
    raise ConfigurationError(f"{spec!r} is neither a catalog system nor a file")
