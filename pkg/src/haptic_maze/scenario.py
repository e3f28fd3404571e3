"""Scenario files: a maze reference plus every simulation parameter.

Same YAML dialect as maze files. ``maze_path`` is resolved relative to the
scenario file. Example::

    name: maze1-selftuning
    maze_path: maze1.yaml
    sim:
      dt: 0.001
      virtual_mass: 1.0
      max_sim_time: 120.0
      profile: SelfTuning
      k_wall: 50000.0
      d_wall: 100.0
      rng_seed: 0
      stiffness: {k_max: 1000.0, k_min: 300.0, zeta: 0.7}
      planner: {f_th_low: 5.0, f_th_high: 7.0, f_abort: 60.0, v_const_e: 0.04,
                v_const_b: 0.05, r_th: 0.001, h: 0.5, m_steps: 2000,
                seed_direction: [1.0, 0.0], bounce_exit_force: 5.0,
                bounce_exit_dwell: 0.2}

Omitted ``sim`` fields take the defaults above.
"""
from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path
from typing import Union

import yaml

from .controller import ProfileMode, StiffnessParams
from .maze import Maze, ParseError, ValidationError, _Fields, bundled_path, load_maze, parse_document
from .planner import PlannerConfig, PlannerConfigError
from .sim import SimConfig, SimConfigError
from .vecmath import InvalidParams

_TOP_KEYS = {"name", "maze_path", "sim"}
_SIM_KEYS = {"dt", "virtual_mass", "max_sim_time", "profile", "k_wall", "d_wall", "rng_seed", "stiffness", "planner"}
_STIFFNESS_KEYS = {"k_max", "k_min", "zeta"}
_PLANNER_KEYS = {"f_th_low", "f_th_high", "f_abort", "v_const_e", "v_const_b", "r_th", "h", "m_steps",
                 "seed_direction", "bounce_exit_force", "bounce_exit_dwell"}

BUNDLED_SCENARIOS = (
    "maze1-high", "maze1-low", "maze1-selftuning",
    "maze1clutter-high", "maze1clutter-low", "maze1clutter-selftuning",
    "maze2-selftuning", "maze3-selftuning",
)


@dataclass(frozen=True)
class Scenario:
    name: str
    maze_path: Path
    sim: SimConfig
    maze: Maze


def _section(parent: _Fields, key: str, allowed: set, source: str) -> _Fields:
    data = parent.data.get(key)
    if data is None:
        data = {}
    if not isinstance(data, dict):
        parent.fail(f"'{key}' must be a mapping")
    return _Fields(data, key, source, allowed, set())


def _parse_sim(top: _Fields, source: str) -> SimConfig:
    sim = _section(top, "sim", _SIM_KEYS, source)
    stiff = _section(sim, "stiffness", _STIFFNESS_KEYS, source)
    plan = _section(sim, "planner", _PLANNER_KEYS, source)
    base_p = PlannerConfig()
    base_k = StiffnessParams()
    base = SimConfig()

    def num(f, key, default):
        return f.number(key, default) if key in f.data else float(default)

    dt = num(sim, "dt", base.dt)
    m_steps = plan.data.get("m_steps", base_p.m_steps)
    if isinstance(m_steps, bool) or not isinstance(m_steps, int):
        plan.fail(f"'m_steps' must be an integer, got {m_steps!r}")
    seed = plan.data.get("seed_direction", list(base_p.seed_direction[:2]))
    if not isinstance(seed, list):
        plan.fail(f"'seed_direction' must be a list of 2 numbers, got {seed!r}")
    seed = plan.point("seed_direction", seed)
    rng_seed = sim.data.get("rng_seed", base.rng_seed)
    if isinstance(rng_seed, bool) or not isinstance(rng_seed, int):
        sim.fail(f"'rng_seed' must be an integer, got {rng_seed!r}")
    profile = sim.data.get("profile", base.profile_mode.value)
    try:
        profile = ProfileMode(profile)
    except ValueError:
        sim.fail(f"'profile' must be one of {', '.join(p.value for p in ProfileMode)}, got {profile!r}")
    try:
        planner = PlannerConfig(
            f_th_low=num(plan, "f_th_low", base_p.f_th_low),
            f_th_high=num(plan, "f_th_high", base_p.f_th_high),
            f_abort=num(plan, "f_abort", base_p.f_abort),
            v_const_e=num(plan, "v_const_e", base_p.v_const_e),
            v_const_b=num(plan, "v_const_b", base_p.v_const_b),
            r_th=num(plan, "r_th", base_p.r_th),
            h=num(plan, "h", base_p.h),
            m_steps=m_steps,
            dt=dt,
            seed_direction=seed,
            # unset means "same as f_th_low"
            bounce_exit_force=plan.number("bounce_exit_force") if "bounce_exit_force" in plan.data else None,
            bounce_exit_dwell=num(plan, "bounce_exit_dwell", base_p.bounce_exit_dwell),
        )
        stiffness = StiffnessParams(
            k_max=num(stiff, "k_max", base_k.k_max),
            k_min=num(stiff, "k_min", base_k.k_min),
            zeta=num(stiff, "zeta", base_k.zeta),
        )
        return SimConfig(
            dt=dt,
            virtual_mass=num(sim, "virtual_mass", base.virtual_mass),
            max_sim_time=num(sim, "max_sim_time", base.max_sim_time),
            profile_mode=profile,
            planner=planner,
            stiffness=stiffness,
            k_wall=num(sim, "k_wall", base.k_wall),
            d_wall=num(sim, "d_wall", base.d_wall),
            rng_seed=rng_seed,
        )
    except (PlannerConfigError, InvalidParams, SimConfigError) as exc:
        raise ValidationError(f"{source}: sim: {exc}") from None


def load_scenario(path: Union[str, os.PathLike]) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read scenario file: {exc.strerror}", str(path)) from None
    source = str(path)
    data = parse_document(text, source)
    top = _Fields(data, "scenario", source, _TOP_KEYS, {"maze_path"})
    maze_ref = data["maze_path"]
    if not isinstance(maze_ref, str) or not maze_ref:
        top.fail("'maze_path' must be a non-empty string")
    maze_path = Path(maze_ref)
    if not maze_path.is_absolute():
        maze_path = path.parent / maze_path
    if not maze_path.is_file():
        top.fail(f"maze file not found: {maze_path}")
    sim = _parse_sim(top, source)
    return Scenario(str(data.get("name", path.stem)), maze_path, sim, load_maze(maze_path))


def scenario_document(name: str, maze_path: str, cfg: SimConfig) -> str:
    """Render ``cfg`` as a scenario file with every field spelled out."""
    p, k = cfg.planner, cfg.stiffness
    doc = {
        "name": name,
        "maze_path": maze_path,
        "sim": {
            "dt": cfg.dt,
            "virtual_mass": cfg.virtual_mass,
            "max_sim_time": cfg.max_sim_time,
            "profile": cfg.profile_mode.value,
            "k_wall": cfg.k_wall,
            "d_wall": cfg.d_wall,
            "rng_seed": cfg.rng_seed,
            "stiffness": {"k_max": k.k_max, "k_min": k.k_min, "zeta": k.zeta},
            "planner": {
                "f_th_low": p.f_th_low, "f_th_high": p.f_th_high, "f_abort": p.f_abort,
                "v_const_e": p.v_const_e, "v_const_b": p.v_const_b,
                "r_th": p.r_th, "h": p.h, "m_steps": p.m_steps,
                "seed_direction": list(p.seed_direction[:2]),
                "bounce_exit_force": p.bounce_exit_force, "bounce_exit_dwell": p.bounce_exit_dwell,
            },
        },
    }
    return yaml.safe_dump(doc, sort_keys=False)


def bundled_scenario_path(name: str) -> Path:
    if name not in BUNDLED_SCENARIOS:
        raise KeyError(f"no bundled scenario {name!r}; choose from {', '.join(BUNDLED_SCENARIOS)}")
    return bundled_path(f"{name}.scenario")
