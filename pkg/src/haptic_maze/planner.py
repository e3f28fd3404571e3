"""Haptic interaction planner: Exploration and Bouncing strategies under a
three-state machine (Exploration, Bouncing, Error).

The planner only sees the actual pose and the sensed external force. Each
control tick it emits an increment to the desired pose.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .vecmath import EPS_NORM, DegenerateVector, angle_between, norm, normalize

# force components at or below this (after normalization) give no bounce
EPS_COMP = 1e-6

# slack on clock comparisons, clocks are integer multiples of dT
_CLOCK_TOL = 1e-9


class Mode(str, enum.Enum):
    EXPLORATION = "Exploration"
    BOUNCING = "Bouncing"
    ERROR = "Error"


class InsufficientHistory(ValueError):
    pass


class PlannerConfigError(ValueError):
    pass


@dataclass(frozen=True)
class PlannerConfig:
    f_th_low: float = 5.0  # N
    f_th_high: float = 7.0  # N
    f_abort: float = 60.0  # N
    v_const_e: float = 0.04  # m/s
    v_const_b: float = 0.05  # m/s
    r_th: float = 1e-3  # m
    h: float = 0.5  # s
    m_steps: int = 2000
    dt: float = 1e-3  # s
    seed_direction: tuple = (1.0, 0.0, 0.0)
    bounce_exit_force: float | None = None  # N, defaults to f_th_low
    bounce_exit_dwell: float = 0.2  # s

    def __post_init__(self):
        if not (0.0 < self.f_th_low < self.f_th_high < self.f_abort):
            raise PlannerConfigError(
                f"force thresholds must satisfy 0 < low < high < abort, got "
                f"{self.f_th_low}, {self.f_th_high}, {self.f_abort}"
            )
        for name in ("v_const_e", "v_const_b", "r_th", "h", "dt"):
            if not getattr(self, name) > 0.0:
                raise PlannerConfigError(f"{name} must be positive, got {getattr(self, name)!r}")
        if int(self.m_steps) != self.m_steps or self.m_steps < 1:
            raise PlannerConfigError(f"m_steps must be an integer >= 1, got {self.m_steps!r}")
        if self.bounce_exit_dwell < 0.0:
            raise PlannerConfigError("bounce_exit_dwell must be non-negative")
        seed = tuple(float(c) for c in self.seed_direction)
        if len(seed) == 2:
            seed = seed + (0.0,)
        if len(seed) != 3 or seed[2] != 0.0:
            raise PlannerConfigError(f"seed_direction must be a planar vector, got {self.seed_direction!r}")
        try:
            unit = normalize(np.array(seed))
        except DegenerateVector:
            raise PlannerConfigError("seed_direction must be non-zero") from None
        object.__setattr__(self, "seed_direction", tuple(float(c) for c in unit))
        if self.bounce_exit_force is None:
            object.__setattr__(self, "bounce_exit_force", self.f_th_low)
        elif not self.bounce_exit_force > 0.0:
            raise PlannerConfigError("bounce_exit_force must be positive")

    @property
    def h_steps(self) -> int:
        return int(round(self.h / self.dt))

    @property
    def history_capacity(self) -> int:
        # one extra slot so a sample exactly max(m, h) steps back is retained
        return max(self.m_steps, self.h_steps) + 1


class PoseHistory:
    """Fixed-capacity ring buffer of poses, newest last."""

    def __init__(self, capacity: int):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self._buf = np.zeros((capacity, 3))
        self._capacity = capacity
        self._count = 0
        self._head = 0  # next write slot

    @classmethod
    def from_poses(cls, poses, capacity: int | None = None) -> "PoseHistory":
        poses = [np.asarray(p, dtype=np.float64) for p in poses]
        hist = cls(capacity or max(len(poses), 1))
        for p in poses:
            hist.append(p)
        return hist

    def __len__(self) -> int:
        return self._count

    @property
    def capacity(self) -> int:
        return self._capacity

    def append(self, pose: np.ndarray) -> None:
        self._buf[self._head] = pose
        self._head = (self._head + 1) % self._capacity
        if self._count < self._capacity:
            self._count += 1

    def back(self, k: int) -> np.ndarray:
        """Sample ``k`` steps before the newest, clamped to the oldest held."""
        if self._count == 0:
            raise InsufficientHistory("empty pose history")
        k = min(k, self._count - 1)
        return self._buf[(self._head - 1 - k) % self._capacity].copy()

    @property
    def newest(self) -> np.ndarray:
        return self.back(0)

    def copy(self) -> "PoseHistory":
        other = PoseHistory(self._capacity)
        other._buf = self._buf.copy()
        other._count = self._count
        other._head = self._head
        return other


@dataclass
class PlannerState:
    mode: Mode
    current_direction: np.ndarray
    history: PoseHistory
    low_detected: bool = False
    high_detected: bool = False
    r_low: np.ndarray = field(default_factory=lambda: np.zeros(3))
    r_high: np.ndarray = field(default_factory=lambda: np.zeros(3))
    alpha: float = 0.0
    beta: float = 0.0
    force_below_since: float | None = None
    # bookkeeping, read by the simulation log
    direction_updates: int = 0
    degenerate_updates: int = 0
    bounce_entries: int = 0

    @classmethod
    def initial(cls, cfg: PlannerConfig) -> "PlannerState":
        return cls(
            mode=Mode.EXPLORATION,
            current_direction=np.array(cfg.seed_direction, dtype=np.float64),
            history=PoseHistory(cfg.history_capacity),
        )


@dataclass(frozen=True)
class PlannerOutput:
    delta_r_d: np.ndarray
    mode_after: Mode


def _planar_unit(v: np.ndarray) -> np.ndarray:
    return normalize(np.array([v[0], v[1], 0.0]))


def exploration_step(state: PlannerState, x_a: np.ndarray, f_ext: np.ndarray, cfg: PlannerConfig) -> PlannerOutput:
    """One Exploration tick.

    ``r_low`` and ``r_high`` are latched when the force norm first reaches the
    low and then the high threshold; the new direction is the unit
    displacement between them. Both latches reset after every direction
    computation. A zero displacement (both thresholds crossed on the same
    tick, or no motion in between) keeps the old direction.
    """
    f = norm(f_ext)
    if not state.low_detected and f >= cfg.f_th_low:
        state.r_low = np.array(x_a, dtype=np.float64)
        state.low_detected = True
    if state.low_detected and not state.high_detected and f >= cfg.f_th_high:
        state.r_high = np.array(x_a, dtype=np.float64)
        state.high_detected = True
        try:
            state.current_direction = _planar_unit(state.r_high - state.r_low)
            state.direction_updates += 1
        except DegenerateVector:
            state.degenerate_updates += 1
        state.low_detected = False
        state.high_detected = False
    return PlannerOutput(state.current_direction * (cfg.v_const_e * cfg.dt), state.mode)


def _axis_scale(component: float, r_trend_unit: np.ndarray, axis: int) -> float:
    if abs(component) <= EPS_COMP:
        return 0.0
    projected = np.zeros(3)
    projected[axis] = component
    phi = angle_between(projected, r_trend_unit)
    s = 1.0 - abs(math.cos(phi))
    return -s if component < 0.0 else s


def bouncing_init(r_trend: np.ndarray, f_ext: np.ndarray) -> tuple[float, float]:
    """Scaling factors ``(alpha, beta)`` for the bounce along x and y.

    Each factor is ``1 - |cos(phi)|`` with ``phi`` the angle between the
    force's axis component and the motion trend, signed like that force
    component. Raises DegenerateVector if either input is (near) zero.
    """
    f_hat = normalize(f_ext)
    r_hat = normalize(r_trend)
    return _axis_scale(f_hat[0], r_hat, 0), _axis_scale(f_hat[1], r_hat, 1)


def bouncing_step(state: PlannerState, cfg: PlannerConfig) -> PlannerOutput:
    step = cfg.v_const_b * cfg.dt
    return PlannerOutput(np.array([state.alpha * step, state.beta * step, 0.0]), state.mode)


def motion_trend(history: PoseHistory, m_steps: int) -> np.ndarray:
    """Displacement of the newest pose from the one ``m_steps`` back."""
    if len(history) < 2:
        raise InsufficientHistory(f"need at least 2 poses, have {len(history)}")
    return history.newest - history.back(m_steps)


def fsm_update(state: PlannerState, x_a: np.ndarray, f_ext: np.ndarray, clock: float, cfg: PlannerConfig) -> Mode:
    """Record ``x_a`` in the pose history and apply the mode transitions.

    - any mode but Error goes to Error once the force norm reaches ``f_abort``
    - Exploration goes to Bouncing when the pose moved less than ``r_th`` over
      the last ``h`` seconds; the bounce factors are frozen on entry
    - Bouncing goes back to Exploration once the force norm stayed below
      ``bounce_exit_force`` for ``bounce_exit_dwell`` seconds
    """
    state.history.append(x_a)
    if state.mode is Mode.ERROR:
        return state.mode
    f = norm(f_ext)
    if f >= cfg.f_abort:
        state.mode = Mode.ERROR
        return state.mode

    if state.mode is Mode.EXPLORATION:
        h_steps = cfg.h_steps
        if len(state.history) > h_steps:
            dd = norm(x_a - state.history.back(h_steps))
            if dd < cfg.r_th:
                try:
                    state.alpha, state.beta = bouncing_init(motion_trend(state.history, cfg.m_steps), f_ext)
                except DegenerateVector:
                    return state.mode
                state.mode = Mode.BOUNCING
                state.force_below_since = None
                state.bounce_entries += 1
        return state.mode

    # Bouncing
    if f < cfg.bounce_exit_force:
        if state.force_below_since is None:
            state.force_below_since = clock
        if clock - state.force_below_since >= cfg.bounce_exit_dwell - _CLOCK_TOL:
            _leave_bouncing(state)
    else:
        state.force_below_since = None
    return state.mode


def _leave_bouncing(state: PlannerState) -> None:
    state.mode = Mode.EXPLORATION
    state.low_detected = False
    state.high_detected = False
    state.force_below_since = None
    bounce = np.array([state.alpha, state.beta, 0.0])
    if norm(bounce) > EPS_NORM:
        state.current_direction = normalize(bounce)


def plan(state: PlannerState, x_a: np.ndarray, f_ext: np.ndarray, clock: float, cfg: PlannerConfig) -> PlannerOutput:
    """Full planner tick: transitions first, then the active strategy."""
    mode = fsm_update(state, x_a, f_ext, clock, cfg)
    if mode is Mode.EXPLORATION:
        return exploration_step(state, x_a, f_ext, cfg)
    if mode is Mode.BOUNCING:
        return bouncing_step(state, cfg)
    return PlannerOutput(np.zeros(3), mode)
