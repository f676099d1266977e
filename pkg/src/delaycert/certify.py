"""Razumikhin level sets from undelayed trajectories, and the certificate pipelines.

A convergent undelayed trajectory ``y`` defines, per component, the running
minimum ``m_i(t) = min_{[start, t]} y_i`` and the level-crossing time
``T_i(a)``, the first time ``m_i`` drops strictly below ``a``. Then
``V(x) = exp(-min_i T_i(x_i))`` and ``h_i(u) = T_i(m_i(u))`` is the first
time at or after ``u`` where the envelope resumes decreasing.

For a breakpoint ``t^p`` with ``y(t^p) << y(0)`` the point
``zeta_i = y_i(h_i(t^p))`` bounds the sublevel set ``V <= exp(-t^p)``;
every delayed solution with history in ``[0, zeta]`` converges to the
origin when ``f(zeta) + G(zeta, ..., zeta) <= 0``. Checks are sampled
falsifiers backed by Monte-Carlo simulation of the delayed system under
random bounded delays.
"""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass, field, replace
from typing import List, NamedTuple, Optional, Sequence

import numpy as np

from . import sampling
from .core import (DEFAULT_MARGIN, EPS_ORD, DenseTrajectory, HistorySegment, as_state, cmp_ll,
                   cubic_range, first_below)
from .integrate import (DivergenceError, IntegratorConfig, integrate_bounding, integrate_dde,
                        integrate_ode, integrate_ode_backward)
from .systems import (ConfigurationError, SystemDescriptor, eval_undelayed_field,
                      make_bounding_system, shift_to_origin)


class CertificationInfeasible(RuntimeError):
    """The construction does not apply (reported in the certificate, not fatal)."""


class Capped(NamedTuple):
    """A time value and whether it was capped at the end of the trajectory."""
    time: float
    capped: bool


# --- Razumikhin profile ----------------------------------------------------


class RazumikhinProfile:
    """Queryable ``T_i``, ``V``, ``h_i`` and envelope ``m_i`` of one trajectory.

    ``two_sided`` profiles start at a negative time ``-T_b`` (backward run
    joined to a forward run) and are used for the global construction.
    """

    def __init__(self, traj: DenseTrajectory, two_sided: bool = False):
        self.traj = traj
        self.two_sided = bool(two_sided)
        self.start = float(traj.t_start)
        self.end = float(traj.t_end)
        self.y_start = traj.y[0].copy()
        self.y_start.flags.writeable = False

    @property
    def n(self) -> int:
        return self.traj.n

    def envelope(self, i: int, t) -> np.ndarray:
        """Running minimum ``m_i`` at one time or an array of times."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        k, s = self.traj._locate(t)
        a, b, c, d = (v[k, i] for v in self.traj._coef)
        part, _ = cubic_range(a, b, c, d, 0.0, s, ends=(a, self.traj(t)[:, i]))
        prev = np.where(k > 0, self.traj.prefix_min()[np.maximum(k - 1, 0), i], np.inf)
        return np.minimum(prev, part)

    def T_many(self, i: int, levels):
        """Vectorised ``T_i``: (times, capped) arrays."""
        levels = np.atleast_1d(np.asarray(levels, dtype=float))
        top = self.y_start[i]
        if np.any(levels > top + EPS_ORD * max(1.0, abs(top))):
            raise ValueError(f"level above y_{i + 1} at the profile start ({top})")
        if np.any(levels < -EPS_ORD):
            raise ValueError("levels must be nonnegative")
        times, found = first_below(self.traj, i, np.minimum(levels, top), strict=True)
        return np.where(found, times, self.end), ~found


def compute_T(profile: RazumikhinProfile, i: int, a: float) -> Capped:
    """First time the running minimum of ``y_i`` drops strictly below ``a``."""
    t, capped = profile.T_many(i, [a])
    return Capped(float(t[0]), bool(capped[0]))


def compute_V(profile: RazumikhinProfile, x) -> float:
    """``exp(-min_i T_i(x_i))`` for ``x`` in ``[0, y(start)]``."""
    x = as_state(x, profile.n)
    if np.any(x > profile.y_start + EPS_ORD * np.maximum(1.0, np.abs(profile.y_start))) or np.any(x < -EPS_ORD):
        raise ValueError(f"{x} is outside the profile box [0, {profile.y_start}]")
    T = min(compute_T(profile, i, x[i]).time for i in range(profile.n))
    return math.exp(-T)


def compute_h(profile: RazumikhinProfile, i: int, u: float) -> Capped:
    """Earliest time ``>= u`` at which the envelope ``m_i`` strictly decreases."""
    if u < profile.start - 1e-12 * max(1.0, abs(profile.start)):
        raise ValueError(f"u={u} precedes the profile start {profile.start}")
    level = float(profile.envelope(i, min(max(u, profile.start), profile.end))[0])
    times, found = first_below(profile.traj, i, [level], strict=True)
    if not found[0]:
        return Capped(profile.end, True)
    return Capped(max(float(times[0]), u), False)


def select_tp(traj: DenseTrajectory, margin: float = DEFAULT_MARGIN, t0: float = 0.0) -> float:
    """First breakpoint ``t >= t0`` with ``y(t) << y(t0)`` at the given margin."""
    y0 = traj(t0)
    thresh = y0 - margin * np.maximum(1.0, np.abs(y0))
    ok = np.all(traj.y < thresh, axis=1) & (traj.t >= t0)
    idx = np.flatnonzero(ok)
    if idx.size == 0:
        raise CertificationInfeasible(f"no breakpoint with y(t) << y({t0:g}) at margin {margin}")
    return float(traj.t[idx[0]])


class Zeta(NamedTuple):
    value: np.ndarray
    h: np.ndarray
    capped: np.ndarray
    oracle_gap: float


def compute_zeta(profile: RazumikhinProfile, tp: float) -> Zeta:
    """``zeta_i = m_i(tp)``, cross-checked against ``y_i(h_i(tp))``."""
    value = np.array([profile.envelope(i, tp)[0] for i in range(profile.n)])
    hs = [compute_h(profile, i, tp) for i in range(profile.n)]
    h = np.array([v.time for v in hs])
    capped = np.array([v.capped for v in hs])
    defn = np.array([profile.traj(h[i])[i] for i in range(profile.n)])
    # a capped h has no crossing: the definitional value is not a witness there
    gap = np.where(capped, 0.0, np.abs(defn - value))
    return Zeta(value, h, capped, float(gap.max()))


class ZetaC(NamedTuple):
    c: float
    value: np.ndarray
    window_limited: bool


def compute_zeta_global(profile: RazumikhinProfile, c: float) -> ZetaC:
    """``zeta^c_i = m_i(-log c)`` on a two-sided profile."""
    if not c > 0:
        raise ValueError("c must be positive")
    u = -math.log(c)
    limited = u < profile.start
    u = min(max(u, profile.start), profile.end)
    value = np.array([profile.envelope(i, u)[0] for i in range(profile.n)])
    return ZetaC(float(c), value, bool(limited))


# --- checks ----------------------------------------------------------------


@dataclass
class CheckResult:
    name: str
    passed: bool
    details: dict = field(default_factory=dict)
    witness: Optional[dict] = None

    def to_dict(self) -> dict:
        out = {"passed": bool(self.passed), "details": _jsonable(self.details)}
        if self.witness is not None:
            out["witness"] = _jsonable(self.witness)
        return out


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    return obj


def verify_field_sign(sys: SystemDescriptor, v, strict: bool = False, margin: float = EPS_ORD) -> CheckResult:
    """``f(v) + G(v, ..., v) <= 0`` within the order tolerance (``<< 0`` if strict)."""
    v = as_state(v, sys.n)
    val = eval_undelayed_field(sys, v)
    if strict:
        bad = ~(val < -margin)
        passed = cmp_ll(val, np.zeros(sys.n), margin)
    else:
        bad = val > EPS_ORD
        passed = not bad.any()
    witness = None
    if not passed:
        comps = np.flatnonzero(bad)
        witness = {"components": comps.tolist(), "labels": [f"x_{k + 1}" for k in comps],
                   "values": val[comps].tolist()}
    return CheckResult("field_sign", bool(passed), {"point": v, "field": val, "strict": strict}, witness)


# --- configuration ---------------------------------------------------------


@dataclass(frozen=True)
class CertifyConfig:
    """Settings of the certificate pipelines.

    ``horizon`` and ``delta`` fall back to the system's catalog metadata
    and then to ``max(20 / slowest linearised rate, 50 r)`` and 1e-6.
    """
    margin: float = DEFAULT_MARGIN
    delta: Optional[float] = None
    horizon: Optional[float] = None
    step: float = 0.1
    trials: int = 50
    seed: int = 0
    tp: Optional[float] = None
    level_samples: int = 1000
    level_sim_trials: int = 10
    level_sim_horizon: Optional[float] = None
    c_sequence: tuple = (1.0, 10.0, 100.0, 1000.0)
    expansion: float = 10.0
    backward_horizon: float = 20.0
    backward_growth: float = 100.0
    strict: bool = False
    delay_kinds: tuple = ("sinusoidal", "random")
    domination: bool = True
    slack: float = 1e-6
    oracle_tol: float = 1e-8

    def digest(self) -> str:
        payload = json.dumps(_jsonable(asdict(self)), sort_keys=True)
        return hashlib.sha256(payload.encode()).hexdigest()[:16]

    def integrator(self) -> IntegratorConfig:
        return IntegratorConfig(step=self.step)


def slowest_rate(sys: SystemDescriptor) -> float:
    """Smallest ``|Re lambda|`` of the undelayed Jacobian at the equilibrium."""
    xs = np.zeros(sys.n) if sys.equilibrium is None else sys.equilibrium
    eps = 1e-6
    J = np.empty((sys.n, sys.n))
    for k in range(sys.n):
        e = np.zeros(sys.n)
        e[k] = eps
        J[:, k] = (eval_undelayed_field(sys, xs + e) - eval_undelayed_field(sys, xs - e)) / (2 * eps)
    return float(np.min(np.abs(np.linalg.eigvals(J).real)))


def resolve_horizon(sys: SystemDescriptor, cfg: CertifyConfig) -> float:
    if cfg.horizon is not None:
        return float(cfg.horizon)
    if "horizon" in sys.meta:
        return float(sys.meta["horizon"])
    rate = slowest_rate(sys)
    if rate < 1e-6:
        raise ConfigurationError(f"{sys.name}: linearisation has a zero rate; configure a horizon")
    return max(20.0 / rate, 50.0 * sys.r)


def resolve_delta(sys: SystemDescriptor, cfg: CertifyConfig) -> float:
    if cfg.delta is not None:
        return float(cfg.delta)
    return float(sys.meta.get("delta", 1e-6))


# --- certificates ----------------------------------------------------------


@dataclass
class Certificate:
    kind: str
    system: str
    system_digest: str
    status: str = "unverified"
    reason: Optional[str] = None
    zeta: Optional[np.ndarray] = None
    zeta_c: Optional[list] = None
    zeta_lower: Optional[np.ndarray] = None
    zeta_upper: Optional[np.ndarray] = None
    tp: Optional[float] = None
    checks: dict = field(default_factory=dict)
    sweep: Optional[dict] = None
    notes: list = field(default_factory=list)
    provenance: dict = field(default_factory=dict)

    @property
    def verified(self) -> bool:
        return self.status == "verified"

    def add(self, check: CheckResult, prefix: str = "") -> CheckResult:
        self.checks[prefix + check.name] = check
        return check

    def settle(self) -> "Certificate":
        """Verified iff every recorded check passed (infeasible stays infeasible)."""
        if self.status != "infeasible":
            self.status = "verified" if self.checks and all(c.passed for c in self.checks.values()) else "unverified"
            if self.status == "unverified" and self.reason is None:
                failed = sorted(k for k, c in self.checks.items() if not c.passed)
                self.reason = "failed checks: " + ", ".join(failed) if failed else "no checks ran"
        return self

    def to_dict(self) -> dict:
        out = {"kind": self.kind, "system": self.system, "system_digest": self.system_digest,
               "status": self.status, "verified": self.verified,
               "checks": {k: c.to_dict() for k, c in sorted(self.checks.items())},
               "sweep": self.sweep, "notes": list(self.notes), "provenance": self.provenance}
        if self.reason is not None:
            out["reason"] = self.reason
        if self.zeta is not None:
            out["zeta"] = self.zeta
        if self.zeta_c is not None:
            out["zeta_c"] = self.zeta_c
        if self.zeta_lower is not None:
            out["zeta_lower"] = self.zeta_lower
            out["zeta_upper"] = self.zeta_upper
        out["tp"] = self.tp
        return _jsonable(out)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def _new_certificate(kind, sys, cfg, **prov) -> Certificate:
    provenance = {"seed": cfg.seed, "config_digest": cfg.digest(), "system": sys.describe()}
    provenance.update(prov)
    return Certificate(kind=kind, system=sys.name, system_digest=sys.digest(), provenance=provenance)


def _infeasible(cert: Certificate, reason: str) -> Certificate:
    cert.status = "infeasible"
    cert.reason = reason
    return cert


# --- level-set check --------------------------------------------------------


def verify_level_set(sys: SystemDescriptor, profile: RazumikhinProfile, tp: float, samples: int = 1000,
                     seed: int = 0, zeta=None, sim_trials: int = 10, sim_horizon: Optional[float] = None,
                     cfg: Optional[CertifyConfig] = None) -> CheckResult:
    """Sampled checks of ``S = {x in [0, y(0)] : V(x) <= exp(-tp)}``.

    (a) sampled members of S lie below zeta, (b) zeta is a member, and
    (c) delayed runs from constant histories at members stay in S.
    Membership uses the root-found ``T_i``, an independent route from the
    envelope that defines zeta.
    """
    cfg = cfg or CertifyConfig()
    n = profile.n
    zeta = compute_zeta(profile, tp).value if zeta is None else as_state(zeta, n)
    top = profile.y_start
    tol = EPS_ORD * np.maximum(1.0, np.abs(zeta))
    rng = sampling.trial_rng(seed, sampling.LEVEL_SET, 0)

    def members(X):
        T = np.column_stack([profile.T_many(i, X[:, i])[0] for i in range(n)])
        return T.min(axis=1) >= tp - 1e-12 * max(1.0, abs(tp))

    # (a) rejection sampling; the box [0, zeta] is enriched so S is hit often
    accepted = np.empty((0, n))
    drawn = 0
    for _ in range(100):
        if accepted.shape[0] >= samples:
            break
        X = rng.random((max(samples, 256), n)) * top
        X[::2] = rng.random((X[::2].shape[0], n)) * np.minimum(zeta * 1.05, top)
        drawn += X.shape[0]
        accepted = np.vstack([accepted, X[members(X)]])
    accepted = accepted[:samples]
    above = np.any(accepted > zeta + tol, axis=1)
    details = {"members": int(accepted.shape[0]), "drawn": drawn}
    witness = None
    ok_a = not above.any()
    if not ok_a:
        witness = {"subcheck": "a", "point": accepted[np.argmax(above)]}
    # (b)
    ok_b = bool(members(zeta[None, :])[0])
    if not ok_b and witness is None:
        witness = {"subcheck": "b", "point": zeta}
    # (c) short delayed runs from constant histories at S-points
    horizon = sim_horizon if sim_horizon is not None else 20.0 * max(sys.r, 1.0)
    ok_c = True
    worst = -np.inf
    picks = accepted[:sim_trials] if accepted.shape[0] else np.empty((0, n))
    for k, x0 in enumerate(picks):
        r = sampling.trial_rng(seed, sampling.LEVEL_SIM, k)
        kind = cfg.delay_kinds[k % len(cfg.delay_kinds)]
        delays = sampling.random_delays(r, sys.m, sys.r, kind)
        try:
            tr = integrate_dde(sys, HistorySegment.constant(x0, sys.r), (0.0, horizon), cfg.integrator(), delays=delays)
        except DivergenceError:
            ok_c = False
            witness = witness or {"subcheck": "c", "trial": k, "seed": seed, "start": x0, "diverged": True}
            continue
        excess = float(np.max(tr.y - zeta - cfg.slack * np.maximum(1.0, np.abs(zeta))))
        worst = max(worst, excess)
        if excess > 0:
            ok_c = False
            witness = witness or {"subcheck": "c", "trial": k, "seed": seed, "start": x0,
                                  "excess": excess}
    details.update({"a_members_below_zeta": ok_a, "b_zeta_in_set": ok_b, "c_invariance": ok_c,
                    "c_runs": int(picks.shape[0]), "c_horizon": horizon})
    return CheckResult("level_set", ok_a and ok_b and ok_c, details, witness)


# --- Monte-Carlo sweeps ------------------------------------------------------


def run_sweep(sys: SystemDescriptor, lower, upper, horizon: float, cfg: CertifyConfig, delta: float,
              target=None, upper_bound: Optional[np.ndarray] = None,
              lower_bound: Optional[np.ndarray] = None, trials: Optional[int] = None,
              stream: int = sampling.SWEEP) -> CheckResult:
    """Delayed runs from random histories in ``[lower, upper]`` under random delays.

    Passes when every run ends within `delta` of `target` (sup norm) and,
    when node-aligned bounds are given, stays between them up to the slack.
    """
    trials = cfg.trials if trials is None else trials
    target = np.zeros(sys.n) if target is None else as_state(target, sys.n)
    worst = 0.0
    dom_excess = -np.inf
    failures = []
    for k in range(trials):
        hist, delays, kind = sampling.sweep_inputs(cfg.seed, stream, k, lower, upper, sys.r, sys.m,
                                                   cfg.delay_kinds)
        try:
            tr = integrate_dde(sys, hist, (0.0, horizon), cfg.integrator(), delays=delays)
        except DivergenceError as err:
            failures.append({"trial": k, "seed": cfg.seed, "stream": stream, "kind": kind,
                             "diverged_at": err.t_last})
            worst = math.inf
            continue
        norm = float(np.max(np.abs(tr.y[-1] - target)))
        worst = max(worst, norm)
        excess = -np.inf
        if upper_bound is not None:
            excess = float(np.max(tr.y - upper_bound - cfg.slack))
        if lower_bound is not None:
            excess = max(excess, float(np.max(lower_bound - tr.y - cfg.slack)))
        dom_excess = max(dom_excess, excess)
        if norm >= delta or excess > 0:
            failures.append({"trial": k, "seed": cfg.seed, "stream": stream, "kind": kind,
                             "terminal_norm": norm, "domination_excess": excess})
    summary = {"trials": trials, "horizon": horizon, "max_terminal_norm": worst, "seed": cfg.seed,
               "delta": delta, "failures": len(failures), "converged": trials - len(failures)}
    if upper_bound is not None or lower_bound is not None:
        summary["domination_max_excess"] = dom_excess
    details = dict(summary)
    if trials == 0:
        details["evidence"] = "none"
    return CheckResult("sweep", not failures, details, failures[0] if failures else None)


def _bounding_nodes(sys, v, horizon, cfg):
    """Bounding trajectory from the constant history v on the sweep grid."""
    tr = integrate_bounding(make_bounding_system(sys), HistorySegment.constant(v, sys.r), (0.0, horizon),
                            cfg.integrator())
    return tr


# --- pipelines ---------------------------------------------------------------


def _converged_trajectory(sys, y0, horizon, delta, cfg):
    try:
        traj = integrate_ode(sys, y0, (0.0, horizon), cfg.integrator())
    except DivergenceError as err:
        raise CertificationInfeasible(f"undelayed solution diverged at t={err.t_last:g}") from None
    final = float(np.max(np.abs(traj.y[-1])))
    if not final < delta:
        raise CertificationInfeasible(
            f"undelayed solution not converged: |y({horizon:g})| = {final:.3g} >= {delta:g}")
    return traj


def certify_region(sys: SystemDescriptor, y0, cfg: CertifyConfig = CertifyConfig()) -> Certificate:
    """Local certificate: delayed solutions with history in ``[0, zeta]`` converge.

    Systems whose equilibrium is not the origin are shifted first (``y0``
    above the equilibrium); zeta is reported in the original coordinates.
    """
    y0 = as_state(y0, sys.n, "y0")
    offset = None
    if sys.equilibrium is not None and np.any(sys.equilibrium != 0):
        offset = sys.equilibrium.copy()
        work = shift_to_origin(sys, "above")
        y0 = y0 - offset
    else:
        work = sys
    cert = _new_certificate("local", sys, cfg, y0=y0 if offset is None else y0 + offset)
    try:
        zeta, tp, horizon, delta = _local_construction(work, y0, cfg, cert)
    except CertificationInfeasible as err:
        return _infeasible(cert, str(err))
    if offset is not None:
        cert.notes.append("computed in coordinates shifted to the equilibrium")
    cert.zeta = zeta if offset is None else zeta + offset
    cert.tp = tp
    if cert.checks["field_sign"].passed:
        bound = _bounding_nodes(work, zeta, horizon, cfg).y if cfg.domination else None
        sw = cert.add(run_sweep(work, np.zeros(work.n), zeta, horizon, cfg, delta, upper_bound=bound))
        cert.sweep = {k: sw.details[k] for k in ("trials", "horizon", "max_terminal_norm", "seed")}
    return cert.settle()


def _local_construction(sys, y0, cfg, cert, prefix=""):
    """Undelayed run, profile, tp, zeta and the zeta-level checks."""
    if np.any(y0 < -EPS_ORD):
        raise CertificationInfeasible("y0 must be nonnegative (above the equilibrium)")
    horizon = resolve_horizon(sys, cfg)
    delta = resolve_delta(sys, cfg)
    traj = _converged_trajectory(sys, y0, horizon, delta, cfg)
    profile = RazumikhinProfile(traj)
    if cfg.tp is not None:
        if not 0.0 <= cfg.tp <= traj.t_end:
            raise ConfigurationError(f"tp={cfg.tp} outside [0, {traj.t_end}]")
        tp = float(cfg.tp)
        if not cmp_ll(traj(tp), y0, cfg.margin):
            raise CertificationInfeasible(f"tp={tp} does not satisfy y(tp) << y(0)")
    else:
        tp = select_tp(traj, cfg.margin)
    z = compute_zeta(profile, tp)
    tol = cfg.oracle_tol * max(1.0, float(np.max(np.abs(z.value))))
    cert.add(CheckResult("zeta_oracle", z.oracle_gap <= tol,
                         {"gap": z.oracle_gap, "tolerance": tol, "h": z.h, "capped": z.capped}), prefix)
    if np.any(z.capped):
        cert.notes.append(f"{prefix}gap map capped at the horizon in components "
                          f"{(np.flatnonzero(z.capped) + 1).tolist()}; zeta is conservative there")
    zero = np.flatnonzero(z.value <= EPS_ORD)
    if zero.size:
        cert.notes.append(f"{prefix}zeta has zero components {(zero + 1).tolist()}: no stability claim")
    cert.add(verify_field_sign(sys, z.value), prefix)
    cert.add(verify_level_set(sys, profile, tp, cfg.level_samples, cfg.seed, zeta=z.value,
                              sim_trials=cfg.level_sim_trials, sim_horizon=cfg.level_sim_horizon, cfg=cfg),
             prefix)
    return z.value, tp, horizon, delta


def certify_point(sys: SystemDescriptor, v, cfg: CertifyConfig = CertifyConfig()) -> Certificate:
    """Region ``[0, v]`` from the field sign at ``v`` alone."""
    v = as_state(v, sys.n, "v")
    cert = _new_certificate("point", sys, cfg)
    cert.zeta = v
    sign = cert.add(verify_field_sign(sys, v, strict=cfg.strict))
    if not cfg.strict:
        cert.notes.append("non-strict field sign: region is the closed box [0, v]")
    if sign.passed:
        try:
            horizon = resolve_horizon(sys, cfg)
        except ConfigurationError as err:
            return _infeasible(cert, str(err))
        delta = resolve_delta(sys, cfg)
        bound = _bounding_nodes(sys, v, horizon, cfg).y if cfg.domination else None
        sw = cert.add(run_sweep(sys, np.zeros(sys.n), v, horizon, cfg, delta, upper_bound=bound))
        cert.sweep = {k: sw.details[k] for k in ("trials", "horizon", "max_terminal_norm", "seed")}
    return cert.settle()


def certify_global(sys: SystemDescriptor, y0, c_sequence: Optional[Sequence[float]] = None,
                   cfg: CertifyConfig = CertifyConfig()) -> Certificate:
    """Growing family ``[0, zeta^c]`` from a trajectory unbounded in negative time.

    Unboundedness is judged on a finite backward window: every component
    must grow by ``backward_growth`` (or the run must hit the overflow
    guard with every component large and positive). The expansion check is
    finite-window evidence, not a proof.
    """
    y0 = as_state(y0, sys.n, "y0")
    cs = [float(c) for c in (cfg.c_sequence if c_sequence is None else c_sequence)]
    cert = _new_certificate("global", sys, cfg, y0=y0, c_sequence=cs)
    cert.notes.append("finite-window evidence of unbounded growth, not a proof")
    if not cs or any(b <= a for a, b in zip(cs, cs[1:])) or cs[0] <= 0:
        raise ConfigurationError("c-sequence must be positive and strictly increasing")
    try:
        horizon = resolve_horizon(sys, cfg)
        delta = resolve_delta(sys, cfg)
        back = integrate_ode_backward(sys, y0, cfg.backward_horizon, cfg.integrator())
        start = back.trajectory.y[0]
        need = cfg.backward_growth * np.maximum(1.0, np.abs(y0))
        grown = start >= (np.full(sys.n, 0.01 * cfg.integrator().guard) if back.diverged else need)
        # the backward run must stay positive: a component crossing zero does not grow without bound
        positive = np.all(back.trajectory.y >= -EPS_ORD, axis=0)
        absent = np.flatnonzero(~(grown & positive))
        if absent.size:
            raise CertificationInfeasible(
                "backward divergence absent in components " + ", ".join(f"x_{k + 1}" for k in absent))
        fwd = _converged_trajectory(sys, y0, horizon, delta, cfg)
    except CertificationInfeasible as err:
        return _infeasible(cert, str(err))
    profile = RazumikhinProfile(back.trajectory.concat(fwd), two_sided=True)
    cert.provenance["backward_window"] = [profile.start, 0.0]
    levels = [compute_zeta_global(profile, c) for c in cs]
    cert.zeta_c = [{"c": z.c, "zeta": z.value, "window_limited": z.window_limited} for z in levels]
    if any(z.window_limited for z in levels):
        cert.notes.append("some levels exceed the simulated backward window")
    values = np.array([z.value for z in levels])
    mono = bool(np.all(np.diff(values, axis=0) >= -EPS_ORD))
    cert.add(CheckResult("monotone_in_c", mono, {"zeta_c": values}))
    ratio = float(np.min(values[-1] / np.maximum(values[0], 1e-300)))
    cert.add(CheckResult("expansion", ratio >= cfg.expansion, {"ratio": ratio, "required": cfg.expansion}))
    for k, z in enumerate(levels):
        tag = f"c={z.c:g}."
        sign = cert.add(verify_field_sign(sys, z.value), tag)
        if sign.passed:
            bound = _bounding_nodes(sys, z.value, horizon, cfg).y if cfg.domination else None
            sw = run_sweep(sys, np.zeros(sys.n), z.value, horizon, cfg, delta, upper_bound=bound,
                           stream=sampling.SWEEP + 100 * (k + 1))
            cert.add(sw, tag)
    last = cert.checks.get(f"c={levels[-1].c:g}.sweep")
    if last is not None:
        cert.sweep = {k: last.details[k] for k in ("trials", "horizon", "max_terminal_norm", "seed")}
    return cert.settle()


def certify_shifted(sys: SystemDescriptor, y_upper, y_lower, cfg: CertifyConfig = CertifyConfig()) -> Certificate:
    """Interval ``[zeta_lower, zeta_upper]`` around a nonzero equilibrium.

    The upper corner comes from the system shifted above the equilibrium,
    the lower corner from the mirrored system below it.
    """
    if sys.equilibrium is None:
        raise ConfigurationError(f"{sys.name} has no declared equilibrium")
    xs = sys.equilibrium.copy()
    y_upper = as_state(y_upper, sys.n, "y_upper")
    y_lower = as_state(y_lower, sys.n, "y_lower")
    cert = _new_certificate("shifted", sys, cfg, y_upper=y_upper, y_lower=y_lower)
    if not (np.all(y_upper > xs) and np.all(y_lower < xs)):
        return _infeasible(cert, "need y_upper >> equilibrium >> y_lower")
    parts = {}
    horizon = None
    for direction, y0 in (("above", y_upper - xs), ("below", xs - y_lower)):
        sub = shift_to_origin(sys, direction)
        try:
            gamma, tp, horizon, delta = _local_construction(sub, y0, cfg, cert, prefix=f"{direction}.")
        except CertificationInfeasible as err:
            return _infeasible(cert, f"{direction}: {err}")
        parts[direction] = (sub, gamma, tp)
    (sa, ga, tpa), (sb, gb, tpb) = parts["above"], parts["below"]
    cert.zeta_upper = xs + ga
    cert.zeta_lower = xs - gb
    cert.tp = tpa
    cert.provenance["tp_below"] = tpb
    if cert.checks["above.field_sign"].passed and cert.checks["below.field_sign"].passed:
        ub = lb = None
        if cfg.domination:
            ub = xs + _bounding_nodes(sa, ga, horizon, cfg).y
            lb = xs - _bounding_nodes(sb, gb, horizon, cfg).y
        sw = cert.add(run_sweep(sys, cert.zeta_lower, cert.zeta_upper, horizon, cfg, delta, target=xs,
                                upper_bound=ub, lower_bound=lb))
        cert.sweep = {k: sw.details[k] for k in ("trials", "horizon", "max_terminal_norm", "seed")}
    return cert.settle()
