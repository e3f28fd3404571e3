"""Fixed-step closed loop: planner -> self-tuning -> impedance force ->
virtual-mass end effector -> penalty contacts -> force sensing.

The end effector is a point mass in task space integrated with semi-implicit
Euler; control and physics share one step ``dt``.
"""
from __future__ import annotations

import enum
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .controller import (
    ImpedanceProfile,
    ProfileMode,
    StiffnessParams,
    cartesian_force,
    make_profile,
    self_tune,
    tuning_direction,
)
from .maze import DEFAULT_D_WALL, DEFAULT_K_WALL, Maze, contact_force, contact_query
from .planner import Mode, PlannerConfig, PlannerState, plan
from .vecmath import norm

DIVERGENCE_LIMIT = 1e6


class NumericalDivergence(RuntimeError):
    pass


class EmptyLog(ValueError):
    pass


class SimConfigError(ValueError):
    pass


class Outcome(str, enum.Enum):
    GOAL = "Goal"
    ERROR = "Error"
    TIMEOUT = "Timeout"


@dataclass(frozen=True)
class SimConfig:
    dt: float = 1e-3  # s
    virtual_mass: float = 1.0  # kg
    max_sim_time: float = 120.0  # s
    profile_mode: ProfileMode = ProfileMode.SELF_TUNING
    planner: PlannerConfig = field(default_factory=PlannerConfig)
    stiffness: StiffnessParams = field(default_factory=StiffnessParams)
    k_wall: float = DEFAULT_K_WALL  # N/m
    d_wall: float = DEFAULT_D_WALL  # N s/m
    rng_seed: int = 0  # reserved, the dynamics use no randomness

    def __post_init__(self):
        object.__setattr__(self, "profile_mode", ProfileMode(self.profile_mode))
        for name in ("dt", "virtual_mass", "max_sim_time", "k_wall"):
            if not getattr(self, name) > 0.0:
                raise SimConfigError(f"{name} must be positive, got {getattr(self, name)!r}")
        if self.d_wall < 0.0:
            raise SimConfigError("d_wall must be non-negative")
        if not math.isclose(self.planner.dt, self.dt, rel_tol=1e-12):
            raise SimConfigError(f"planner dt {self.planner.dt} differs from simulation dt {self.dt}")


@dataclass
class SimState:
    t: float
    x_a: np.ndarray
    v_a: np.ndarray
    x_d: np.ndarray
    f_ext: np.ndarray
    planner: PlannerState
    profile: ImpedanceProfile
    tune_dir: np.ndarray
    step_index: int = 0

    @classmethod
    def initial(cls, cfg: SimConfig, maze: Maze) -> "SimState":
        start = np.array(maze.start, dtype=np.float64)
        seed = np.array(cfg.planner.seed_direction, dtype=np.float64)
        return cls(
            t=0.0,
            x_a=start.copy(),
            v_a=np.zeros(3),
            x_d=start.copy(),
            f_ext=np.zeros(3),
            planner=PlannerState.initial(cfg.planner),
            profile=make_profile(cfg.profile_mode, cfg.stiffness, seed),
            tune_dir=seed,
        )


_MODE_CODES = {Mode.EXPLORATION: 0, Mode.BOUNCING: 1, Mode.ERROR: 2}
_MODES_BY_CODE = {v: k for k, v in _MODE_CODES.items()}


class TrajectoryLog:
    """One record per control step (plus the initial state at t = 0)."""

    def __init__(self):
        self._t = []
        self._x_a = []
        self._x_d = []
        self._f = []
        self._mode = []
        self._k_dir = []
        self.direction_updates = 0
        self.bounce_entries = 0

    def append(self, state: SimState) -> None:
        self._t.append(state.t)
        self._x_a.append(state.x_a.copy())
        self._x_d.append(state.x_d.copy())
        self._f.append(state.f_ext.copy())
        self._mode.append(_MODE_CODES[state.planner.mode])
        self._k_dir.append(state.profile.major_direction.copy())
        self.direction_updates = state.planner.direction_updates
        self.bounce_entries = state.planner.bounce_entries

    def __len__(self) -> int:
        return len(self._t)

    @property
    def t(self) -> np.ndarray:
        return np.array(self._t)

    @property
    def x_a(self) -> np.ndarray:
        return np.array(self._x_a).reshape(-1, 3)

    @property
    def x_d(self) -> np.ndarray:
        return np.array(self._x_d).reshape(-1, 3)

    @property
    def f_ext(self) -> np.ndarray:
        return np.array(self._f).reshape(-1, 3)

    @property
    def force_norm(self) -> np.ndarray:
        return np.linalg.norm(self.f_ext, axis=1)

    @property
    def mode_codes(self) -> np.ndarray:
        return np.array(self._mode, dtype=np.int8)

    @property
    def modes(self) -> list[Mode]:
        return [_MODES_BY_CODE[c] for c in self._mode]

    @property
    def k_direction(self) -> np.ndarray:
        return np.array(self._k_dir).reshape(-1, 3)


@dataclass(frozen=True)
class Metrics:
    completed: bool
    outcome: Outcome
    duration: float  # s
    max_tracking_error: float  # m
    max_force: float  # N
    path_length: float  # m
    direction_updates: int = 0
    bounce_entries: int = 0

    def to_dict(self) -> dict:
        d = asdict(self)
        d["outcome"] = self.outcome.value
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Metrics":
        d = dict(d)
        d["outcome"] = Outcome(d["outcome"])
        return cls(**d)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "Metrics":
        return cls.from_dict(json.loads(text))


def _check_finite(state: SimState) -> None:
    for name in ("x_a", "v_a", "x_d", "f_ext"):
        v = getattr(state, name)
        if not (np.all(np.isfinite(v)) and np.max(np.abs(v)) <= DIVERGENCE_LIMIT):
            raise NumericalDivergence(f"{name} diverged at t={state.t:.3f} s: {v}")


def step(state: SimState, cfg: SimConfig, maze: Maze) -> SimState:
    """Advance ``state`` by one control period in place and return it."""
    dt = cfg.dt
    out = plan(state.planner, state.x_a, state.f_ext, state.t, cfg.planner)
    dr = out.delta_r_d
    state.x_d = state.x_d + dr

    if state.profile.mode is ProfileMode.SELF_TUNING:
        direction = tuning_direction(dr, state.tune_dir)
        if direction is not state.tune_dir and not np.array_equal(direction, state.tune_dir):
            state.profile = self_tune(state.profile, direction)
        state.tune_dir = direction

    f_c = cartesian_force(state.profile, state.x_d, state.x_a, dr / dt, state.v_a)
    f_env = contact_force(contact_query(state.x_a, maze), state.v_a, cfg.k_wall, cfg.d_wall)

    state.v_a = state.v_a + (dt / cfg.virtual_mass) * (f_c + f_env)
    state.x_a = state.x_a + dt * state.v_a
    # the planner is fed the force the environment exerts on the peg
    state.f_ext = f_env
    state.step_index += 1
    state.t = state.step_index * dt
    _check_finite(state)
    return state


def compute_metrics(log: TrajectoryLog, outcome: Outcome | str) -> Metrics:
    if len(log) == 0:
        raise EmptyLog("cannot compute metrics of an empty log")
    outcome = Outcome(outcome)
    x_a, x_d = log.x_a, log.x_d
    return Metrics(
        completed=outcome is Outcome.GOAL,
        outcome=outcome,
        duration=float(log.t[-1]),
        max_tracking_error=float(np.max(np.linalg.norm(x_d - x_a, axis=1))),
        max_force=float(np.max(log.force_norm)),
        path_length=float(np.sum(np.linalg.norm(np.diff(x_a, axis=0), axis=1))),
        direction_updates=log.direction_updates,
        bounce_entries=log.bounce_entries,
    )


def run(cfg: SimConfig, maze: Maze) -> tuple[TrajectoryLog, Metrics]:
    """Simulate until the goal is reached, the planner aborts, or time runs out."""
    state = SimState.initial(cfg, maze)
    log = TrajectoryLog()
    log.append(state)
    goal = np.array(maze.goal)
    n_max = int(math.ceil(cfg.max_sim_time / cfg.dt - 1e-9))
    outcome = Outcome.TIMEOUT
    while state.step_index < n_max:
        try:
            step(state, cfg, maze)
        except NumericalDivergence:
            state.planner.mode = Mode.ERROR
            outcome = Outcome.ERROR
            break
        log.append(state)
        if state.planner.mode is Mode.ERROR:
            outcome = Outcome.ERROR
            break
        if norm(state.x_a - goal) <= maze.goal_radius:
            outcome = Outcome.GOAL
            break
    return log, compute_metrics(log, outcome)
