"""Property batteries run by the ``suite`` command.

Each property is a sampled falsifier over one system. A result carries the
number of samples examined and, on failure, a witness that can be replayed
from the recorded seed and trial index.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import sampling
from .certify import (CertifyConfig, RazumikhinProfile, compute_T, compute_V, compute_h, compute_zeta,
                      resolve_horizon, select_tp)
from .core import EPS_ORD, HistorySegment, as_state
from .integrate import DivergenceError, IntegratorConfig, integrate_bounding, integrate_dde, integrate_ode
from .systems import (SystemDescriptor, batch_undelayed_field, check_quasimonotonicity, domain_box,
                      eval_delayed_field, eval_undelayed_field, make_bounding_system, shift_to_origin)


@dataclass
class PropertyResult:
    name: str
    system: str
    passed: bool
    count: int
    witness: Optional[dict] = None
    details: dict = field(default_factory=dict)
    # exact checks (not random trials) never count as sampled evidence
    sampled: bool = True

    @property
    def evidence(self) -> str:
        if not self.sampled:
            return "exact"
        return "none" if self.count == 0 else "sampled"

    def to_dict(self) -> dict:
        out = {"name": self.name, "system": self.system, "passed": bool(self.passed), "count": int(self.count),
               "evidence": self.evidence}
        if self.witness is not None:
            out["witness"] = self.witness
        if self.details:
            out["details"] = self.details
        return out


@dataclass(frozen=True)
class SuiteSettings:
    monotonicity_trials: int = 10_000
    invariance_trials: int = 10_000
    bounding_field_trials: int = 1000
    order_pairs: int = 100
    domination_trials: int = 50
    profile_samples: int = 1000
    step: float = 0.05
    short_horizon: Optional[float] = None

    @classmethod
    def uniform(cls, trials: int, **kw) -> "SuiteSettings":
        return cls(monotonicity_trials=trials, invariance_trials=trials, bounding_field_trials=trials,
                   order_pairs=trials, domination_trials=trials, profile_samples=trials, **kw)


def _short(sys, s: SuiteSettings) -> float:
    return s.short_horizon if s.short_horizon is not None else 20.0 * max(sys.r, 1.0)


def _integ(s: SuiteSettings) -> IntegratorConfig:
    return IntegratorConfig(step=s.step)


def prop_quasimonotone(sys, s: SuiteSettings, seed: int) -> PropertyResult:
    if s.monotonicity_trials == 0:
        return PropertyResult("quasimonotonicity", sys.name, True, 0)
    rep = check_quasimonotonicity(sys, s.monotonicity_trials, domain_box(sys), seed=seed)
    w = None
    if not rep.ok:
        w = dict(rep.violations[0])
        w["seed"] = seed
    return PropertyResult("quasimonotonicity", sys.name, rep.ok, rep.samples, w,
                          {"violations": rep.count})


def prop_time_invariance(sys, s: SuiteSettings, seed: int) -> PropertyResult:
    """Delayed field at a constant history equals the undelayed field, for every t."""
    rng = sampling.trial_rng(seed, 11, 0)
    box = domain_box(sys)
    V = box.sample(rng, s.invariance_trials)
    T = rng.uniform(0.0, 100.0, s.invariance_trials)
    ref = batch_undelayed_field(sys, V) if s.invariance_trials else V
    for k in range(s.invariance_trials):
        got = eval_delayed_field(sys, T[k], HistorySegment.constant(V[k], sys.r))
        if not np.array_equal(got, ref[k]):
            return PropertyResult("constant_history_invariance", sys.name, False, k + 1,
                                  {"trial": k, "seed": seed, "t": T[k], "v": V[k].tolist()})
    return PropertyResult("constant_history_invariance", sys.name, True, s.invariance_trials)


def prop_bounding_field(sys, s: SuiteSettings, seed: int) -> PropertyResult:
    """The window-supremum coupling dominates the delayed coupling."""
    box = domain_box(sys)
    bsys = make_bounding_system(sys)
    for k in range(s.bounding_field_trials):
        rng = sampling.trial_rng(seed, 12, k)
        hist = sampling.random_history(rng, box.lower, box.upper, sys.r)
        t = rng.uniform(0.0, 50.0)
        delays = sampling.random_delays(rng, sys.m, sys.r, "sinusoidal" if k % 2 == 0 else "random")
        got = eval_delayed_field(sys.with_delays(delays), t, hist)
        bound = eval_delayed_field(bsys, t, hist)
        if np.any(got > bound + EPS_ORD * np.maximum(1.0, np.abs(bound))):
            return PropertyResult("bounding_field_dominates", sys.name, False, k + 1,
                                  {"trial": k, "seed": seed, "t": t, "delayed": got.tolist(),
                                   "bounding": bound.tolist()})
    return PropertyResult("bounding_field_dominates", sys.name, True, s.bounding_field_trials)


def prop_shift_zero(sys, s: SuiteSettings, seed: int) -> PropertyResult:
    if sys.equilibrium is None:
        return PropertyResult("shift_to_origin_zero", sys.name, True, 0, sampled=False)
    worst = 0.0
    for direction in ("above", "below"):
        worst = max(worst, float(np.max(np.abs(eval_undelayed_field(shift_to_origin(sys, direction),
                                                                     np.zeros(sys.n))))))
    ok = worst <= EPS_ORD
    return PropertyResult("shift_to_origin_zero", sys.name, ok, 2, None if ok else {"residual": worst}, sampled=False)


def prop_order_preservation(sys, s: SuiteSettings, seed: int) -> list:
    """Ordered histories give ordered solutions; nonnegative histories stay nonnegative."""
    box = domain_box(sys)
    horizon = _short(sys, s)
    order_w = pos_w = None
    worst = -np.inf
    runs = 0
    check_pos = bool(np.all(box.lower >= 0)) and _positive(sys)
    for k in range(s.order_pairs):
        rng = sampling.trial_rng(seed, sampling.ORDER_PAIRS, k)
        lo, hi = sampling.ordered_history_pair(rng, box.lower, box.upper, sys.r)
        delays = sampling.random_delays(rng, sys.m, sys.r, "sinusoidal" if k % 2 == 0 else "random")
        try:
            a = integrate_dde(sys, lo, (0.0, horizon), _integ(s), delays=delays)
            b = integrate_dde(sys, hi, (0.0, horizon), _integ(s), delays=delays)
        except DivergenceError as err:
            order_w = order_w or {"trial": k, "seed": seed, "diverged_at": err.t_last}
            continue
        runs += 1
        excess = float(np.max(a.y - b.y))
        worst = max(worst, excess)
        if excess > 1e-6 and order_w is None:
            order_w = {"trial": k, "seed": seed, "excess": excess}
        if check_pos:
            low = float(min(a.y.min(), b.y.min()))
            if low < -1e-9 and pos_w is None:
                pos_w = {"trial": k, "seed": seed, "min": low}
    out = [PropertyResult("order_preservation", sys.name, order_w is None, s.order_pairs, order_w,
                          {"max_excess": worst if runs else None})]
    if check_pos:
        out.append(PropertyResult("positivity", sys.name, pos_w is None, 2 * runs, pos_w))
    return out


def _positive(sys) -> bool:
    """Orthant-invariance precondition: equilibrium in the closed orthant."""
    return sys.equilibrium is None or bool(np.all(sys.equilibrium >= 0))


def _nonpositive_point(sys, seed: int):
    """A large domain point with ``f(v) + G(v, ..., v) <= 0``, if sampling finds one."""
    box = domain_box(sys)
    rng = sampling.trial_rng(seed, 13, 0)
    V = np.vstack([box.sample(rng, 4000), box.upper, box.lower + 0.2 * (box.upper - box.lower)])
    F = batch_undelayed_field(sys, V)
    ok = np.all(F <= 0, axis=1) & np.all(np.isfinite(F), axis=1)
    base = np.zeros(sys.n) if sys.equilibrium is None else sys.equilibrium
    ok &= np.all(V >= base, axis=1)
    if not ok.any():
        return None
    cand = V[ok]
    return cand[np.argmax(np.min(cand - base, axis=1))]


def prop_domination(sys, s: SuiteSettings, seed: int) -> PropertyResult:
    """Delayed solutions from histories below v stay below the bounding solution from v."""
    box = domain_box(sys)
    v = box.upper
    horizon = _short(sys, s)
    try:
        z = integrate_bounding(make_bounding_system(sys), HistorySegment.constant(v, sys.r), (0.0, horizon), _integ(s))
    except DivergenceError as err:
        return PropertyResult("bounding_domination", sys.name, False, 0, {"bounding_diverged_at": err.t_last})
    worst = -np.inf
    for k in range(s.domination_trials):
        hist, delays, kind = sampling.sweep_inputs(seed, sampling.DOMINATION, k, box.lower, v, sys.r, sys.m)
        try:
            x = integrate_dde(sys, hist, (0.0, horizon), _integ(s), delays=delays)
        except DivergenceError as err:
            return PropertyResult("bounding_domination", sys.name, False, k + 1,
                                  {"trial": k, "seed": seed, "diverged_at": err.t_last})
        excess = float(np.max(x.y - z.y))
        worst = max(worst, excess)
        if excess > 1e-6:
            return PropertyResult("bounding_domination", sys.name, False, k + 1,
                                  {"trial": k, "seed": seed, "kind": kind, "excess": excess})
    return PropertyResult("bounding_domination", sys.name, True, s.domination_trials,
                          details={"max_excess": worst if s.domination_trials else None, "v": v.tolist()})


def prop_monotone_decrease(sys, s: SuiteSettings, seed: int) -> PropertyResult:
    """From a constant history with nonpositive field the bounding solution is nonincreasing."""
    if s.domination_trials == 0:
        return PropertyResult("bounding_monotone_decrease", sys.name, True, 0)
    v = _nonpositive_point(sys, seed)
    if v is None:
        return PropertyResult("bounding_monotone_decrease", sys.name, True, 0,
                              details={"note": "no point with nonpositive field found"})
    z = integrate_bounding(make_bounding_system(sys), HistorySegment.constant(v, sys.r),
                           (0.0, _short(sys, s)), _integ(s))
    rise = float(np.max(np.diff(z.y, axis=0)))
    ok = rise <= 1e-8
    return PropertyResult("bounding_monotone_decrease", sys.name, ok, z.num_segments,
                          None if ok else {"v": v.tolist(), "max_rise": rise, "seed": seed},
                          {"v": v.tolist(), "max_rise": rise})


def prop_profile(sys, s: SuiteSettings, seed: int) -> list:
    """Profile identities on the catalog trajectory: V = exp(-T), T monotone, h(u) >= u, zeta oracle."""
    name = sys.name
    if s.profile_samples == 0 or sys.equilibrium is None:
        return [PropertyResult("profile_identities", name, True, 0)]
    y0 = as_state(sys.meta.get("y0", domain_box(sys).upper), sys.n)
    if np.any(sys.equilibrium != 0):
        # identities are stated for an equilibrium at the origin: use the upper shift
        y0 = y0 - sys.equilibrium
        sys = shift_to_origin(sys, "above")
    try:
        horizon = resolve_horizon(sys, CertifyConfig())
        traj = integrate_ode(sys, y0, (0.0, horizon), IntegratorConfig(step=s.step))
    except Exception as err:  # noqa: BLE001 - reported as a failed property
        return [PropertyResult("profile_identities", name, False, 0, {"error": str(err)})]
    prof = RazumikhinProfile(traj)
    rng = sampling.trial_rng(seed, 14, 0)
    top = prof.y_start
    X = rng.random((s.profile_samples, sys.n)) * top
    fails = {}
    T = np.column_stack([prof.T_many(i, X[:, i])[0] for i in range(sys.n)])
    for k in range(min(s.profile_samples, 200)):
        gap = abs(compute_V(prof, X[k]) - math.exp(-T[k].min()))
        if gap > 1e-12 and "V_identity" not in fails:
            fails["V_identity"] = {"sample": k, "gap": gap}
    for i in range(sys.n):
        order = np.argsort(X[:, i])
        if np.any(np.diff(T[order, i]) > 1e-12) and "T_monotone" not in fails:
            fails["T_monotone"] = {"component": i}
    U = rng.uniform(0.0, min(traj.t_end, 50.0), min(s.profile_samples, 200))
    for u in U:
        for i in range(sys.n):
            if compute_h(prof, i, u).time < u and "h_ge_u" not in fails:
                fails["h_ge_u"] = {"u": u, "component": i}
    try:
        tp = select_tp(traj)
        z = compute_zeta(prof, tp)
        if z.oracle_gap > 1e-8 * max(1.0, float(np.max(np.abs(z.value)))):
            fails["zeta_oracle"] = {"gap": z.oracle_gap, "tp": tp}
    except Exception as err:  # noqa: BLE001
        fails["zeta_oracle"] = {"error": str(err)}
    w = None
    if fails:
        w = {"seed": seed, **{k: v for k, v in fails.items()}}
    return [PropertyResult("profile_identities", name, not fails, s.profile_samples, w)]


def prop_step_halving(sys, s: SuiteSettings, seed: int) -> PropertyResult:
    """Observed order of the undelayed integrator from three step sizes."""
    y0 = as_state(sys.meta.get("y0", domain_box(sys).upper), sys.n)
    ends = [integrate_ode(sys, y0, (0.0, 5.0), IntegratorConfig(step=h)).y[-1] for h in (0.2, 0.1, 0.05)]
    e1 = float(np.max(np.abs(ends[0] - ends[1])))
    e2 = float(np.max(np.abs(ends[1] - ends[2])))
    if e2 < 1e-13:
        return PropertyResult("step_halving_order", sys.name, True, 3, details={"note": "at round-off"})
    p = math.log2(e1 / e2)
    ok = p >= 3.5
    return PropertyResult("step_halving_order", sys.name, ok, 3, None if ok else {"order": p},
                          {"order": p})


def run_properties(sys: SystemDescriptor, settings: SuiteSettings, seed: int = 0) -> list:
    out = [prop_quasimonotone(sys, settings, seed),
           prop_time_invariance(sys, settings, seed),
           prop_bounding_field(sys, settings, seed),
           prop_shift_zero(sys, settings, seed)]
    out += prop_order_preservation(sys, settings, seed)
    out.append(prop_domination(sys, settings, seed))
    out.append(prop_monotone_decrease(sys, settings, seed))
    out += prop_profile(sys, settings, seed)
    if settings.profile_samples:
        out.append(prop_step_halving(sys, settings, seed))
    return out
