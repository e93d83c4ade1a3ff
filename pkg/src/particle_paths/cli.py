"""Experiment driver.

One JSON config file describes an experiment; flags only override
top-level fields.  Modes:

* ``simulate``    run once, write trajectory.csv / events.json / summary.txt
* ``convergence`` run a particle-count family, write rate.csv / rate.json
* ``audit``       re-check invariants on a previously written output dir
* ``ftl-check``   report the deviation from the follow-the-leader rule

Exit codes: 0 success, 2 config error, 3 invariant failure, 4 runtime
failure.  Outputs are deterministic for a fixed config (fixed seed, floats
written in shortest round-trip form).
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional

import numpy as np

from . import exports
from .analysis import convergence_study, invariant_audit
from .dynamics import SimulationError, simulate
from .flux import FluxModel, builtin_flux
from .initial import (
    InitialData,
    box_data,
    cell_average,
    piecewise_constant_data,
    place_particles,
    rarefaction_shock_data,
    riemann_data,
    sampled_data,
)
from .reference import burgers_rarefaction_shock, riemann_solution
from .velocity import follow_the_leader_deviation

__all__ = ["ExperimentConfig", "ConfigError", "load_config", "dump_config", "run_cli", "main"]

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INVARIANT = 3
EXIT_RUNTIME = 4


class ConfigError(ValueError):
    def __init__(self, path: str, message: str):
        super().__init__(f"config error at {path}: {message}")
        self.path = path


@dataclass
class ExperimentConfig:
    mode: str = "simulate"
    flux: dict = field(default_factory=lambda: {"kind": "burgers", "params": {}})
    initial_data: dict = field(default_factory=lambda: {"kind": "paper_example", "params": {}})
    placement: dict = field(default_factory=lambda: {"strategy": "uniform", "n": 101})
    time_horizon: float = 0.25
    integrator: dict = field(default_factory=lambda: {"dt_max": 1e-3, "theta": 0.1, "eps_coll": None})
    snapshots: int = 64
    seed: int = 0
    out: str = "results"
    input: Optional[str] = None
    ftl: dict = field(default_factory=lambda: {"pairs": 10000, "tol": 1e-8})
    convergence: dict = field(default_factory=lambda: {"dt_max_ratio": 0.2})

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


_MODES = ("simulate", "convergence", "audit", "ftl-check")


def load_config(path_or_dict) -> ExperimentConfig:
    if isinstance(path_or_dict, dict):
        raw = path_or_dict
    else:
        try:
            raw = json.loads(Path(path_or_dict).read_text())
        except FileNotFoundError:
            raise ConfigError(str(path_or_dict), "file not found")
        except json.JSONDecodeError as exc:
            raise ConfigError(str(path_or_dict), f"invalid JSON: {exc}")
    cfg = ExperimentConfig()
    known = {f.name for f in dataclasses.fields(ExperimentConfig)}
    for key, value in raw.items():
        if key not in known:
            raise ConfigError(key, "unknown key")
        setattr(cfg, key, value)
    _validate(cfg)
    return cfg


def dump_config(cfg: ExperimentConfig) -> str:
    return json.dumps(cfg.to_dict(), indent=2, sort_keys=True)


def _validate(cfg: ExperimentConfig) -> None:
    if cfg.mode not in _MODES:
        raise ConfigError("mode", f"must be one of {_MODES}, got {cfg.mode!r}")
    if not isinstance(cfg.flux, dict) or "kind" not in cfg.flux:
        raise ConfigError("flux", "need a tagged record {kind, params}")
    if not isinstance(cfg.initial_data, dict) or "kind" not in cfg.initial_data:
        raise ConfigError("initial_data", "need a tagged record {kind, params}")
    if cfg.time_horizon <= 0:
        raise ConfigError("time_horizon", "must be positive")
    place = cfg.placement
    if "n" in place:
        if place["n"] < 2:
            raise ConfigError("placement.n", "need at least two particles")
    elif "n_list" in place:
        if len(place["n_list"]) < 3 or any(n < 2 for n in place["n_list"]):
            raise ConfigError("placement.n_list", "need >= 3 counts, each >= 2")
    else:
        raise ConfigError("placement", "need n or n_list")
    if cfg.integrator.get("dt_max", 0) <= 0:
        raise ConfigError("integrator.dt_max", "must be positive")


def _build_data(cfg: ExperimentConfig) -> InitialData:
    kind = cfg.initial_data["kind"]
    params = dict(cfg.initial_data.get("params", {}))
    try:
        if kind == "riemann":
            return riemann_data(**params)
        if kind in ("paper_example", "rarefaction_shock"):
            return rarefaction_shock_data(**params)
        if kind == "box":
            return box_data(**params)
        if kind == "piecewise_constant":
            return piecewise_constant_data(**params)
        if kind == "sampled":
            csv_path = params.pop("path", None)
            if csv_path is not None:
                table = np.loadtxt(csv_path, delimiter=",", skiprows=1)
                return sampled_data(table[:, 0], table[:, 1], **params)
            return sampled_data(**params)
    except (TypeError, ValueError) as exc:
        raise ConfigError("initial_data.params", str(exc))
    raise ConfigError("initial_data.kind", f"unknown kind {kind!r}")


def _build_model(cfg: ExperimentConfig, data: InitialData) -> FluxModel:
    kind = cfg.flux["kind"]
    params = dict(cfg.flux.get("params", {}))
    u_high = data.sup_u0 * (1.0 + 1e-12)
    try:
        if kind == "tabulated" and "path" in params:
            table = np.loadtxt(params.pop("path"), delimiter=",", skiprows=1)
            return builtin_flux("tabulated", us=table[:, 0], fs=table[:, 1], **params)
        return builtin_flux(kind, u_high=u_high, **params)
    except (TypeError, ValueError, KeyError) as exc:
        raise ConfigError("flux", str(exc))


def _reference_for(cfg: ExperimentConfig, model: FluxModel):
    kind = cfg.initial_data["kind"]
    if kind in ("paper_example", "rarefaction_shock"):
        if cfg.flux["kind"] != "burgers":
            raise ConfigError("flux.kind", "the rarefaction-shock reference needs the burgers flux")
        return burgers_rarefaction_shock()
    if kind == "riemann":
        params = cfg.initial_data.get("params", {})
        return riemann_solution(model, params["u_l"], params["u_r"], params.get("x0", 0.0))
    raise ConfigError("initial_data.kind", f"no closed-form reference for {kind!r}")


def _mode_simulate(cfg: ExperimentConfig, out: Path) -> int:
    data = _build_data(cfg)
    model = _build_model(cfg, data)
    pos = place_particles(data, int(cfg.placement["n"]), cfg.placement.get("strategy", "uniform"))
    state0 = cell_average(data, pos)
    traj = simulate(
        model,
        state0,
        float(cfg.time_horizon),
        dt_max=float(cfg.integrator["dt_max"]),
        theta=float(cfg.integrator.get("theta", 0.1)),
        eps_coll=cfg.integrator.get("eps_coll"),
        snapshot_count=int(cfg.snapshots),
        data=data,
        config={"seed": cfg.seed},
    )
    audit = invariant_audit(traj)
    out.mkdir(parents=True, exist_ok=True)
    exports.write_trajectory_csv(traj, out / "trajectory.csv")
    exports.write_events_json(traj, out / "events.json")
    mass0 = traj.snapshots[0][1].total_mass
    massT = traj.final_state.total_mass + sum(ev.discarded_mass for ev in traj.events)
    lines = [
        f"mode: simulate ({data.description}; flux {model.name})",
        f"particles: {state0.n_particles}  horizon: {cfg.time_horizon}  dt_max: {cfg.integrator['dt_max']}",
        f"collision events: {len(traj.events)}",
        f"mass drift: {abs(massT - mass0) / max(mass0, 1e-300):.3e}",
        f"tv margin (nonincrease): {audit.checks['tv_diminishing'].margin:.3e}",
        f"audit: {'PASS' if audit.passed else 'FAIL ' + ','.join(audit.failures())}",
    ]
    if data.measure_window:
        lines.append(f"measure window: {data.measure_window}")
    (out / "summary.txt").write_text("\n".join(lines) + "\n")
    print("\n".join(lines))
    return EXIT_OK if audit.passed else EXIT_INVARIANT


def _mode_convergence(cfg: ExperimentConfig, out: Path) -> int:
    data = _build_data(cfg)
    model = _build_model(cfg, data)
    exact = _reference_for(cfg, model)
    n_list = [int(n) for n in cfg.placement["n_list"]]
    fit, reports = convergence_study(
        model,
        data,
        exact,
        n_list,
        float(cfg.time_horizon),
        strategy=cfg.placement.get("strategy", "uniform"),
        dt_max_ratio=float(cfg.convergence.get("dt_max_ratio", 0.2)),
        theta=float(cfg.integrator.get("theta", 0.1)),
    )
    out.mkdir(parents=True, exist_ok=True)
    exports.write_rate_csv(fit, out / "rate.csv")
    payload = {"fit": json.loads(fit.to_json()), "reports": [json.loads(r.to_json()) for r in reports]}
    (out / "rate.json").write_text(json.dumps(payload, indent=2, sort_keys=True))
    print(f"fitted slope: {fit.slope:.4f} (three finest: {fit.slope_tail:.4f})")
    return EXIT_OK


def _mode_audit(cfg: ExperimentConfig, out: Path) -> int:
    data = _build_data(cfg)
    model = _build_model(cfg, data)
    src = Path(cfg.input) if cfg.input else out
    traj = exports.load_trajectory_dir(src, model)
    audit = invariant_audit(traj)
    for name, check in sorted(audit.checks.items()):
        print(f"{'PASS' if check.ok else 'FAIL'} {name}: {check.detail}")
    return EXIT_OK if audit.passed else EXIT_INVARIANT


def _mode_ftl_check(cfg: ExperimentConfig, out: Path) -> int:
    data = _build_data(cfg)
    model = _build_model(cfg, data)
    rng = np.random.default_rng(cfg.seed)
    n_pairs = int(cfg.ftl.get("pairs", 10000))
    tol = float(cfg.ftl.get("tol", 1e-8))
    pairs = rng.uniform(0.0, model.u_high, size=(n_pairs, 2))
    try:
        deviation = follow_the_leader_deviation(model, pairs)
    except ValueError as exc:
        print(f"precondition failed: {exc}")
        return EXIT_INVARIANT
    out.mkdir(parents=True, exist_ok=True)
    (out / "ftl_check.json").write_text(
        json.dumps({"pairs": n_pairs, "max_deviation": deviation, "tol": tol}, indent=2, sort_keys=True)
    )
    print(f"max |V(v_l, v_r) - a(v_r)| over {n_pairs} pairs: {deviation:.3e}")
    return EXIT_OK if deviation <= tol else EXIT_INVARIANT


def _apply_overrides(cfg: ExperimentConfig, sets: List[str]) -> None:
    for item in sets:
        if "=" not in item:
            raise ConfigError(item, "--set expects key=value")
        key, raw = item.split("=", 1)
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        target = cfg
        parts = key.split(".")
        for part in parts[:-1]:
            target = getattr(target, part) if dataclasses.is_dataclass(target) else target[part]
        leaf = parts[-1]
        if dataclasses.is_dataclass(target):
            if not hasattr(target, leaf):
                raise ConfigError(key, "unknown key")
            setattr(target, leaf, value)
        else:
            target[leaf] = value


def run_cli(argv: Optional[List[str]] = None) -> int:
    parser = argparse.ArgumentParser(
        prog="particle-paths", description="particle scheme experiment driver"
    )
    parser.add_argument("config", help="path to a JSON experiment config")
    parser.add_argument("--mode", choices=_MODES, help="override the config mode")
    parser.add_argument("--out", help="override the output directory")
    parser.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override a config field (dot paths allowed)")
    args = parser.parse_args(argv)

    try:
        cfg = load_config(args.config)
        if args.mode:
            cfg.mode = args.mode
        if args.out:
            cfg.out = args.out
        _apply_overrides(cfg, args.set)
        _validate(cfg)
    except ConfigError as exc:
        print(exc, file=sys.stderr)
        return EXIT_CONFIG

    out = Path(cfg.out)
    try:
        if cfg.mode == "simulate":
            return _mode_simulate(cfg, out)
        if cfg.mode == "convergence":
            return _mode_convergence(cfg, out)
        if cfg.mode == "audit":
            return _mode_audit(cfg, out)
        return _mode_ftl_check(cfg, out)
    except ConfigError as exc:
        print(exc, file=sys.stderr)
        return EXIT_CONFIG
    except SimulationError as exc:
        out.mkdir(parents=True, exist_ok=True)
        diag = {"error": str(exc)}
        if exc.state is not None:
            diag["state"] = {
                "time": exc.state.time,
                "positions": [float(x) for x in exc.state.positions],
                "densities": [float(v) for v in exc.state.densities],
            }
        (out / "diagnostic.json").write_text(json.dumps(diag, indent=2, sort_keys=True))
        print(f"runtime failure: {exc} (diagnostic written to {out / 'diagnostic.json'})", file=sys.stderr)
        return EXIT_RUNTIME


def main() -> None:
    sys.exit(run_cli())
