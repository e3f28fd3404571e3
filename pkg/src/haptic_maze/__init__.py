"""Planar haptic exploration of rigid mazes with a self-tuning impedance controller."""
from .controller import ImpedanceProfile, ProfileMode, StiffnessParams, make_profile
from .maze import Maze, bundled_maze, load_maze
from .planner import Mode, PlannerConfig
from .sim import Metrics, Outcome, SimConfig, run

__all__ = [
    "ImpedanceProfile",
    "Maze",
    "Metrics",
    "Mode",
    "Outcome",
    "PlannerConfig",
    "ProfileMode",
    "SimConfig",
    "StiffnessParams",
    "bundled_maze",
    "load_maze",
    "make_profile",
    "run",
]
