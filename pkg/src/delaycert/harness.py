"""Command-line entry point: ``delaycert <simulate|certify|suite|escape-time|catalog>``.

Exit codes: 0 success, 1 unverified certificate or failed property,
2 configuration error, 3 divergence, 4 infeasible certificate.
"""
from __future__ import annotations

import argparse
import json
import math
import sys as _sys
import time
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Optional

import numpy as np

from . import sampling
from .certify import (CertifyConfig, _jsonable, certify_global, certify_point, certify_region,
                      certify_shifted, resolve_delta, resolve_horizon)
from .core import HistorySegment, as_state
from .integrate import (DivergenceError, EventSpec, IntegratorConfig, first_crossing, integrate_bounding,
                        integrate_dde, integrate_ode, trajectory_to_csv_text)
from .properties import SuiteSettings, run_properties
from .systems import (CATALOG, ConfigurationError, SystemDescriptor, catalog_system, dump_system, load_system,
                      make_bounding_system, system_from_mapping, tomllib)

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_DIVERGED, EXIT_INFEASIBLE = 0, 1, 2, 3, 4


@dataclass
class RunConfig:
    """Everything a command needs; built from a TOML file plus CLI overrides."""
    system: object = "example15"
    system_params: dict = field(default_factory=dict)
    seed: int = 0
    out: str = "out"
    kind: str = "local"
    trials: Optional[int] = None
    integrator: dict = field(default_factory=dict)
    certify: dict = field(default_factory=dict)
    simulate: dict = field(default_factory=dict)
    suite: dict = field(default_factory=dict)
    escape: dict = field(default_factory=dict)
    base_dir: Path = Path(".")

    def resolve_system(self) -> SystemDescriptor:
        spec = self.system
        if isinstance(spec, dict):
            return system_from_mapping(spec)
        if spec in CATALOG:
            return catalog_system(spec, **self.system_params)
        path = Path(spec)
        if not path.is_absolute() and not path.exists():
            path = self.base_dir / path
        if path.exists():
            return load_system(path)
        raise ConfigurationError(f"{spec!r} is neither a catalog system nor a file")

    def certify_config(self) -> CertifyConfig:
        known = {f.name for f in fields(CertifyConfig)}
        opts = {k: v for k, v in self.certify.items() if k in known}
        for k in ("c_sequence", "delay_kinds"):
            if k in opts:
                opts[k] = tuple(opts[k])
        opts["seed"] = self.seed
        if self.trials is not None:
            opts["trials"] = self.trials
        if "step" in self.integrator:
            opts.setdefault("step", float(self.integrator["step"]))
        try:
            return CertifyConfig(**opts)
        except TypeError as err:
            raise ConfigurationError(str(err)) from None

    def integrator_config(self) -> IntegratorConfig:
        known = {f.name for f in fields(IntegratorConfig)}
        bad = set(self.integrator) - known
        if bad:
            raise ConfigurationError(f"unknown integrator keys {sorted(bad)}")
        return IntegratorConfig(**self.integrator)


_SECTIONS = ("integrator", "certify", "simulate", "suite", "escape", "system_params")


def load_run_config(path: Optional[str]) -> RunConfig:
    cfg = RunConfig()
    if path is None:
        return cfg
    p = Path(path)
    try:
        data = tomllib.loads(p.read_text())
    except FileNotFoundError:
        raise ConfigurationError(f"config file {path} does not exist") from None
    except (OSError, tomllib.TOMLDecodeError) as err:
        raise ConfigurationError(f"cannot read config {path}: {err}") from None
    cfg.base_dir = p.parent
    unknown = set(data) - set(_SECTIONS) - {"system", "seed", "out", "kind", "trials"}
    if unknown:
        raise ConfigurationError(f"unknown config keys {sorted(unknown)}")
    for key in ("system", "seed", "out", "kind", "trials"):
        if key in data:
            setattr(cfg, key, data[key])
    for key in _SECTIONS:
        if key in data:
            if not isinstance(data[key], dict):
                raise ConfigurationError(f"[{key}] must be a table")
            setattr(cfg, key, dict(data[key]))
    return cfg


def _write(out: Path, name: str, text: str) -> Path:
    out.mkdir(parents=True, exist_ok=True)
    path = out / name
    path.write_text(text)
    return path


def _json(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n"


# --- simulate ---------------------------------------------------------------


def cmd_simulate(cfg: RunConfig) -> int:
    system = cfg.resolve_system()
    icfg = cfg.integrator_config()
    sim = cfg.simulate
    if "r" in sim:
        raise ConfigurationError("set r through [system_params] or the system file")
    x0 = as_state(sim.get("history", system.meta.get("y0", np.ones(system.n))), system.n, "history")
    horizon = float(sim.get("horizon", system.meta.get("simulate_horizon", icfg.horizon)))
    out = Path(cfg.out)
    outputs = {}
    status = EXIT_OK
    runs = [("undelayed", lambda: integrate_ode(system, x0, (0.0, horizon), icfg)),
            ("delayed", lambda: integrate_dde(system, HistorySegment.constant(x0, system.r), (0.0, horizon), icfg))]
    if sim.get("bounding", False):
        runs.append(("bounding", lambda: integrate_bounding(make_bounding_system(system),
                                                           HistorySegment.constant(x0, system.r),
                                                           (0.0, horizon), icfg)))
    summary = {"system": system.name, "horizon": horizon, "history": x0, "runs": {}}
    for name, run in runs:
        try:
            traj = run()
        except DivergenceError as err:
            status = EXIT_DIVERGED
            summary["runs"][name] = {"diverged_at": err.t_last}
            if err.partial is not None:
                outputs[f"{name}.csv"] = trajectory_to_csv_text(err.partial)
            continue
        outputs[f"{name}.csv"] = trajectory_to_csv_text(traj)
        summary["runs"][name] = {"final": traj.y[-1], "final_norm": float(np.max(np.abs(traj.y[-1]))),
                                 "rows": int(traj.t.size)}
    outputs["simulate.json"] = _json(summary)
    for name, text in outputs.items():
        _write(out, name, text)
    for name, info in summary["runs"].items():
        msg = f"diverged at t={info['diverged_at']:g}" if "diverged_at" in info else f"|x(T)|={info['final_norm']:.3e}"
        print(f"{name}: {msg}")
    return status


# --- certify ----------------------------------------------------------------


def _vec(opts, key, system, meta_keys=None):
    if key in opts:
        return as_state(opts[key], system.n, key)
    for mk in meta_keys or (key,):
        if mk in system.meta:
            return as_state(system.meta[mk], system.n, key)
    raise ConfigurationError(f"certify needs '{key}' (config [certify] {key} = [...])")


def cmd_certify(cfg: RunConfig) -> int:
    system = cfg.resolve_system()
    ccfg = cfg.certify_config()
    opts = cfg.certify
    kind = cfg.kind
    if kind == "local":
        cert = certify_region(system, _vec(opts, "y0", system), ccfg)
    elif kind == "point":
        cert = certify_point(system, _vec(opts, "v", system), ccfg)
    elif kind == "global":
        cert = certify_global(system, _vec(opts, "y0", system, ("y0_global", "y0")), None, ccfg)
    elif kind == "shifted":
        cert = certify_shifted(system, _vec(opts, "y_upper", system), _vec(opts, "y_lower", system), ccfg)
    else:
        raise ConfigurationError(f"unknown certificate kind {kind!r}")
    path = _write(Path(cfg.out), "certificate.json", cert.to_json())
    print(f"{cert.kind} certificate for {cert.system}: {cert.status}"
          + (f" ({cert.reason})" if cert.reason else "") + f" -> {path}")
    if cert.status == "infeasible":
        return EXIT_INFEASIBLE
    return EXIT_OK if cert.verified else EXIT_FAIL


# --- suite ------------------------------------------------------------------


def suite_settings(cfg: RunConfig) -> SuiteSettings:
    known = {f.name for f in fields(SuiteSettings)}
    opts = {k: v for k, v in cfg.suite.items() if k in known}
    if cfg.trials is not None:
        return SuiteSettings.uniform(int(cfg.trials), **{k: v for k, v in opts.items()
                                                          if k in ("step", "short_horizon")})
    return SuiteSettings(**opts)


def cmd_suite(cfg: RunConfig, explicit_system: bool = True) -> int:
    settings = suite_settings(cfg)
    if explicit_system:
        systems = [cfg.resolve_system()]
    else:
        systems = [catalog_system(name) for name in sorted(CATALOG)]
    t0 = time.perf_counter()
    results = []
    timing = {}
    for system in systems:
        ts = time.perf_counter()
        results += run_properties(system, settings, cfg.seed)
        timing[system.name] = time.perf_counter() - ts
    passed = all(r.passed for r in results)
    report = {"seed": cfg.seed, "passed": passed, "systems": [s.name for s in systems],
              "evidence": "none" if all(r.evidence != "sampled" for r in results) else "sampled",
              "properties": [r.to_dict() for r in results]}
    out = Path(cfg.out)
    _write(out, "suite.json", _json(report))
    # wall-clock numbers live beside the report so the report itself is reproducible
    timing["total"] = time.perf_counter() - t0
    _write(out, "suite.timing.json", _json({"seconds": timing}))
    for r in results:
        note = " (no evidence)" if r.evidence == "none" else ""
        print(f"{'PASS' if r.passed else 'FAIL'} {r.system}:{r.name} [{r.count}]{note}")
    return EXIT_OK if passed else EXIT_FAIL


# --- escape time -------------------------------------------------------------


def cmd_escape_time(cfg: RunConfig) -> int:
    """First-passage times into ``{x_c <= threshold}``, checked against ``(x_c(0) - threshold)/rate + r``.

    The bound holds whenever ``x_c' <= -rate`` above the threshold; after
    the passage every run must still converge to the equilibrium.
    """
    system = cfg.resolve_system()
    esc = dict(system.meta.get("escape", {}))
    esc.update(cfg.escape)
    for key in ("component", "threshold", "rate"):
        if key not in esc:
            raise ConfigurationError(f"escape-time needs '{key}' in [escape]")
    comp = int(esc["component"])
    thr, rate = float(esc["threshold"]), float(esc["rate"])
    fixed = as_state(esc["history"], system.n, "history") if "history" in esc else None
    histories = int(cfg.trials if cfg.trials is not None else esc.get("histories", 1 if fixed is not None else 100))
    x_max = float(esc.get("x_max", 10.0))
    slack = float(esc.get("slack", system.r))
    ccfg = cfg.certify_config()
    horizon = float(esc.get("horizon", resolve_horizon(system, ccfg)))
    delta = resolve_delta(system, ccfg)
    box_hi = np.array(system.meta.get("domain", [[0.0] * system.n, [5.0] * system.n])[1], dtype=float)
    box_hi[comp] = x_max
    lo = np.zeros(system.n) if system.equilibrium is None else system.equilibrium
    target = lo
    icfg = ccfg.integrator()
    rows = []
    for k in range(histories):
        hist, delays, kind = sampling.sweep_inputs(cfg.seed, sampling.ESCAPE, k, lo, box_hi, system.r, system.m)
        if fixed is not None:
            # a configured constant history replaces the sampled one; delays stay random
            hist, kind = HistorySegment.constant(fixed, system.r), "constant:" + kind
        x0 = hist(0.0)
        bound = max(x0[comp] - thr, 0.0) / rate + slack
        row = {"trial": k, "seed": cfg.seed, "kind": kind, "x0": x0, "bound": bound}
        try:
            tr = integrate_dde(system, hist, (0.0, horizon), icfg, delays=delays)
        except DivergenceError as err:
            row.update(crossing=None, diverged_at=err.t_last, passed=False)
            rows.append(row)
            continue
        # a run that starts inside the target set has crossed at time 0
        tc = 0.0 if x0[comp] <= thr else first_crossing(tr, EventSpec(comp, thr, "downward"))
        final = float(np.max(np.abs(tr.y[-1] - target)))
        row.update(crossing=tc, tight_bound=max(x0[comp] - thr, 0.0) / rate, final_norm=final,
                   within_bound=tc is not None and tc <= bound, converged=final < delta)
        row["passed"] = bool(row["within_bound"] and row["converged"])
        rows.append(row)
    ok = all(r["passed"] for r in rows)
    failures = [r for r in rows if not r["passed"]]
    crossings = [r["crossing"] for r in rows if r.get("crossing") is not None]
    report = {"system": system.name, "seed": cfg.seed, "histories": histories, "component": comp,
              "threshold": thr, "rate": rate, "slack": slack, "horizon": horizon, "delta": delta,
              "finite_crossings": len(crossings), "within_bound": sum(bool(r.get("within_bound")) for r in rows),
              "converged": sum(bool(r.get("converged")) for r in rows),
              "max_crossing_time": max(crossings) if crossings else None, "passed": ok,
              "first_failure": failures[0] if failures else None, "trials": rows}
    _write(Path(cfg.out), "escape_time.json", _json(report))
    print(f"escape-time {system.name}: {report['finite_crossings']}/{histories} finite crossings, "
          f"{report['within_bound']} within bound, {report['converged']} converged")
    return EXIT_OK if ok else EXIT_FAIL


# --- catalog ------------------------------------------------------------------


def cmd_catalog(cfg: RunConfig, explicit_system: bool) -> int:
    if explicit_system:
        print(dump_system(cfg.resolve_system()), end="")
        return EXIT_OK
    for name in sorted(CATALOG):
        s = catalog_system(name)
        doc = (CATALOG[name].__doc__ or "").strip().splitlines()[0]
        print(f"{name:10s} n={s.n} r={s.r:g} delays={s.m}  {doc}")
    return EXIT_OK


# --- argument parsing -------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="delaycert", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--system", help="catalog name or path to a system definition file")
    common.add_argument("--config", help="run configuration (TOML)")
    common.add_argument("--out", help="output directory")
    common.add_argument("--seed", type=int, help="master seed (default 0)")
    common.add_argument("--kind", choices=("local", "global", "point", "shifted"), help="certificate kind")
    common.add_argument("--trials", type=int, help="number of sampled trials")
    sub = p.add_subparsers(dest="command", required=True)
    for name, help_text in (("simulate", "write undelayed/delayed trajectories as CSV"),
                            ("certify", "build and check a certificate"),
                            ("suite", "run the property batteries"),
                            ("escape-time", "first-passage sweep and convergence check"),
                            ("catalog", "list catalog systems or print one as TOML")):
        sub.add_parser(name, parents=[common], help=help_text)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_run_config(args.config)
        explicit = args.system is not None or (args.config is not None and _config_names_system(args.config))
        for key in ("system", "out", "seed", "kind", "trials"):
            val = getattr(args, key)
            if val is not None:
                setattr(cfg, key, val)
        if cfg.trials is not None and int(cfg.trials) < 0:
            raise ConfigurationError("--trials must be >= 0")
        if args.command == "simulate":
            return cmd_simulate(cfg)
        if args.command == "certify":
            return cmd_certify(cfg)
        if args.command == "suite":
            return cmd_suite(cfg, explicit)
        if args.command == "escape-time":
            return cmd_escape_time(cfg)
        return cmd_catalog(cfg, explicit)
    except (ConfigurationError, ValueError) as err:
        print(f"configuration error: {err}", file=_sys.stderr)
        return EXIT_CONFIG


def _config_names_system(path) -> bool:
    data = tomllib.loads(Path(path).read_text())
    return "system" in data


if __name__ == "__main__":
    raise SystemExit(main())
