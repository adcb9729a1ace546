"""Flat sectioned key-value configuration for experiments and the CLI.

Standard INI syntax via :mod:`configparser`; sections mirror the module
configs. Every run is fully determined by the config file, the flags that
override it, and the seed.
"""

from __future__ import annotations

import configparser

import numpy as np

from .controller import PidGains
from .core import ActionSpace
from .gains import SyntheticGainParams
from .simulator import (
    CapacityModel,
    PolicyMode,
    SimConfig,
    TrafficSchedule,
    inject_spike,
)
from .solver import SolverConfig

DEFAULTS: dict[str, dict[str, str]] = {
    "actions": {"costs": "10 20 30 40 50 60 70 80 90 100"},
    "gains": {"mu": "0.0", "sigma": "1.0", "alpha": "0.5", "mode": "power", "top_k": "3"},
    "solver": {"epsilon": "", "max_iterations": "64"},
    "controller": {
        "enabled": "true",
        "kp": "1.5",
        "ki": "0.5",
        "kd": "0.0",
        "theta": "2.0",
        "setpoint": "",
        "mp_min": "",
        "mp_max": "",
        "gain_to_power": "30.0",
    },
    "capacity": {
        "capacity": "40000",
        "base_runtime": "0.1",
        "timeout": "1.0",
        "overload_curve": "1.0",
        "saturation_floor": "0.05",
    },
    "traffic": {"base_rate": "100", "spike_tick": "158", "spike_multiplier": "8"},
    "simulation": {
        "ticks": "500",
        "budget_per_tick": "5000",
        "qps_reference": "100",
        "refresh_period": "10",
        "pool_size": "1000",
        "policy": "dynamic",
        "baseline_action": "4",
        "seed": "0",
    },
}


def read_config(path=None) -> dict[str, dict[str, str]]:
    """Defaults overlaid with an optional INI file."""
    merged = {section: dict(values) for section, values in DEFAULTS.items()}
    if path is not None:
        parser = configparser.ConfigParser()
        with open(path, "r", encoding="utf-8") as fh:
            parser.read_file(fh)
        for section in parser.sections():
            if section not in merged:
                raise ValueError(f"unknown config section [{section}]")
            for key, value in parser.items(section):
                if key not in merged[section]:
                    raise ValueError(f"unknown config key '{key}' in section [{section}]")
                merged[section][key] = value
    return merged


def _opt_float(raw: str) -> float | None:
    return None if raw.strip() == "" else float(raw)


def parse_actions(cfg) -> ActionSpace:
    costs = np.asarray([float(tok) for tok in cfg["actions"]["costs"].split()])
    return ActionSpace(costs)


def parse_gain_params(cfg, seed: int | None = None) -> SyntheticGainParams:
    g = cfg["gains"]
    return SyntheticGainParams(
        mu=float(g["mu"]),
        sigma=float(g["sigma"]),
        alpha=float(g["alpha"]),
        seed=int(cfg["simulation"]["seed"]) if seed is None else seed,
    )


def parse_pid(cfg) -> PidGains:
    c = cfg["controller"]
    return PidGains(
        k_p=float(c["kp"]), k_i=float(c["ki"]), k_d=float(c["kd"]), theta=float(c["theta"])
    )


def parse_capacity(cfg) -> CapacityModel:
    c = cfg["capacity"]
    return CapacityModel(
        capacity=float(c["capacity"]),
        base_runtime=float(c["base_runtime"]),
        timeout=float(c["timeout"]),
        overload_curve=float(c["overload_curve"]),
        saturation_floor=float(c["saturation_floor"]),
    )


def parse_schedule(cfg, ticks: int) -> TrafficSchedule:
    t = cfg["traffic"]
    schedule = TrafficSchedule(((0, float(t["base_rate"])),))
    spike_tick = int(t["spike_tick"])
    multiplier = float(t["spike_multiplier"])
    if 0 <= spike_tick < ticks and multiplier != 1.0:
        schedule = inject_spike(schedule, spike_tick, multiplier)
    return schedule


def build_sim_config(
    cfg,
    seed: int | None = None,
    ticks: int | None = None,
    policy: str | None = None,
    gain_source=None,
) -> SimConfig:
    """Assemble a :class:`SimConfig` from a merged config dict plus overrides."""
    sim = cfg["simulation"]
    ctrl = cfg["controller"]
    run_seed = int(sim["seed"]) if seed is None else int(seed)
    run_ticks = int(sim["ticks"]) if ticks is None else int(ticks)
    kind = sim["policy"] if policy is None else policy
    actions = parse_actions(cfg)
    mp_min = _opt_float(ctrl["mp_min"])
    mp_max = _opt_float(ctrl["mp_max"])
    bounds = None
    if mp_min is not None or mp_max is not None:
        bounds = (
            mp_min if mp_min is not None else float(actions.costs[0]),
            mp_max if mp_max is not None else float(actions.costs[-1]),
        )
    return SimConfig(
        ticks=run_ticks,
        schedule=parse_schedule(cfg, run_ticks),
        capacity=parse_capacity(cfg),
        policy=PolicyMode(
            kind=kind,
            baseline_action=int(sim["baseline_action"]),
            controller_enabled=ctrl["enabled"].strip().lower() in ("1", "true", "yes", "on"),
        ),
        actions=actions,
        gain_params=parse_gain_params(cfg, seed=run_seed),
        gain_source=gain_source,
        budget_per_tick=float(sim["budget_per_tick"]),
        qps_reference=float(sim["qps_reference"]),
        refresh_period=int(sim["refresh_period"]),
        pool_size=int(sim["pool_size"]),
        pid=parse_pid(cfg),
        mp_bounds=bounds,
        setpoint=_opt_float(ctrl["setpoint"]),
        gain_to_power=float(ctrl["gain_to_power"]),
        solver=SolverConfig(
            epsilon=_opt_float(cfg["solver"]["epsilon"]),
            max_iterations=int(cfg["solver"]["max_iterations"]),
        ),
        seed=run_seed,
    )
