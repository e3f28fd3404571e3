"""Command line front end.

    haptic-maze run <scenario> [--out DIR]
    haptic-maze compare <maze> [--out DIR]
    haptic-maze validate <maze>

``<scenario>`` and ``<maze>`` may be file paths or the names of bundled files
(``maze1-selftuning``, ``maze1``...). Set ``HAPTIC_MAZE_LOG=debug`` or ``info``
for progress output on stderr.

Exit codes: 0 goal reached (or command succeeded), 1 configuration error,
2 run ended in Error, 3 run timed out.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

from .controller import ProfileMode
from .maze import BUNDLED_MAZES, Arc, LinearSegment, Maze, ParseError, ValidationError, bundled_path, load_maze
from .scenario import BUNDLED_SCENARIOS, load_scenario
from .sim import Outcome, SimConfig, TrajectoryLog, run

log = logging.getLogger("haptic_maze")

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_CODES = {Outcome.GOAL: 0, Outcome.ERROR: 2, Outcome.TIMEOUT: 3}

CSV_HEADER = ("t", "x_a.x", "x_a.y", "x_d.x", "x_d.y", "F_ext.x", "F_ext.y", "force_norm", "mode")

PROFILE_ORDER = (ProfileMode.HIGH_CONSTANT, ProfileMode.LOW_CONSTANT, ProfileMode.SELF_TUNING)


def _fmt(v: float) -> str:
    return "{:.9g}".format(v)


def write_trajectory_csv(traj: TrajectoryLog, path: Path) -> None:
    t, xa, xd, f, fn = traj.t, traj.x_a, traj.x_d, traj.f_ext, traj.force_norm
    modes = traj.modes
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\r\n")
        w.writerow(CSV_HEADER)
        for i in range(len(t)):
            w.writerow((_fmt(t[i]), _fmt(xa[i, 0]), _fmt(xa[i, 1]), _fmt(xd[i, 0]), _fmt(xd[i, 1]),
                        _fmt(f[i, 0]), _fmt(f[i, 1]), _fmt(fn[i]), modes[i].value))


@dataclass
class ComparisonReport:
    maze: str
    metrics: dict = field(default_factory=dict)  # profile name -> Metrics

    def _names(self, key) -> list:
        return [name for name, _ in sorted(self.metrics.items(), key=lambda kv: (key(kv[1]), kv[0]))]

    @property
    def force_ordering(self) -> list:
        """Profiles from lowest to highest peak force."""
        return self._names(lambda m: m.max_force)

    @property
    def tracking_error_ordering(self) -> list:
        return self._names(lambda m: m.max_tracking_error)

    @property
    def completion_set(self) -> list:
        return sorted(name for name, m in self.metrics.items() if m.completed)

    def _below(self, a: str, b: str, attr: str):
        if a not in self.metrics or b not in self.metrics:
            return None
        return getattr(self.metrics[a], attr) < getattr(self.metrics[b], attr)

    def to_dict(self) -> dict:
        st, hi, lo = ProfileMode.SELF_TUNING.value, ProfileMode.HIGH_CONSTANT.value, ProfileMode.LOW_CONSTANT.value
        return {
            "maze": self.maze,
            "profiles": {name: m.to_dict() for name, m in self.metrics.items()},
            "force_ordering": self.force_ordering,
            "tracking_error_ordering": self.tracking_error_ordering,
            "completion_set": self.completion_set,
            "verdicts": {
                "selftuning_force_below_high": self._below(st, hi, "max_force"),
                "selftuning_tracking_error_below_low": self._below(st, lo, "max_tracking_error"),
            },
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def compare(maze: Maze, cfg: SimConfig | None = None, profiles=PROFILE_ORDER) -> tuple[ComparisonReport, dict]:
    """Run ``maze`` once per stiffness profile with otherwise identical settings."""
    base = cfg or SimConfig()
    report = ComparisonReport(maze.name)
    logs = {}
    for mode in profiles:
        mode = ProfileMode(mode)
        sub = SimConfig(dt=base.dt, virtual_mass=base.virtual_mass, max_sim_time=base.max_sim_time,
                        profile_mode=mode, planner=base.planner, stiffness=base.stiffness,
                        k_wall=base.k_wall, d_wall=base.d_wall, rng_seed=base.rng_seed)
        t0 = time.perf_counter()
        traj, metrics = run(sub, maze)
        log.info("%s %s: %s after %.3f s sim (%.1f s wall)", maze.name, mode.value, metrics.outcome.value,
                 metrics.duration, time.perf_counter() - t0)
        report.metrics[mode.value] = metrics
        logs[mode.value] = traj
    return report, logs


def _resolve(ref: str, bundled: tuple, suffix: str) -> Path:
    p = Path(ref)
    if not p.exists() and ref in bundled:
        return bundled_path(ref + suffix)
    return p


def _out_dir(arg) -> Path:
    out = Path(arg) if arg else Path.cwd()
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_run(scenario_path, output_dir=None) -> int:
    path = _resolve(str(scenario_path), BUNDLED_SCENARIOS, ".scenario")
    try:
        scenario = load_scenario(path)
    except (ParseError, ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = _out_dir(output_dir)
    log.info("running %s on %s (%s)", scenario.name, scenario.maze_path, scenario.sim.profile_mode.value)
    traj, metrics = run(scenario.sim, scenario.maze)
    write_trajectory_csv(traj, out / "trajectory.csv")
    (out / "metrics.json").write_text(metrics.to_json(), encoding="utf-8")
    print(f"{scenario.name}: {metrics.outcome.value} in {metrics.duration:.3f} s, "
          f"max force {metrics.max_force:.2f} N, max tracking error {metrics.max_tracking_error * 1000:.1f} mm")
    return EXIT_CODES[metrics.outcome]


def cmd_compare(maze_path, output_dir=None) -> int:
    path = _resolve(str(maze_path), BUNDLED_MAZES, ".yaml")
    try:
        maze = load_maze(path)
    except (ParseError, ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = _out_dir(output_dir)
    report, logs = compare(maze)
    for name, traj in logs.items():
        write_trajectory_csv(traj, out / f"trajectory-{name}.csv")
    (out / "report.json").write_text(report.to_json(), encoding="utf-8")
    for name, m in report.metrics.items():
        print(f"{name:13s} {m.outcome.value:8s} max force {m.max_force:7.2f} N  "
              f"max tracking error {m.max_tracking_error * 1000:6.1f} mm")
    print("force ordering: " + " < ".join(report.force_ordering))
    print("tracking error ordering: " + " < ".join(report.tracking_error_ordering))
    print("completed: " + (", ".join(report.completion_set) or "none"))
    return EXIT_OK


def cmd_validate(maze_path) -> int:
    path = _resolve(str(maze_path), BUNDLED_MAZES, ".yaml")
    try:
        maze = load_maze(path)
    except (ParseError, ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    n_lines = sum(isinstance(w, LinearSegment) for w in maze.walls)
    n_arcs = sum(isinstance(w, Arc) for w in maze.walls)
    x0, y0, x1, y1 = maze.bounding_box()
    print(f"{maze.name or path}: {n_lines} line(s), {n_arcs} arc(s), {len(maze.clutter)} clutter item(s)")
    print(f"bounding box: x [{x0:.4f}, {x1:.4f}] m, y [{y0:.4f}, {y1:.4f}] m")
    return EXIT_OK


def _configure_logging() -> None:
    level = os.environ.get("HAPTIC_MAZE_LOG", "").strip().lower()
    levels = {"debug": logging.DEBUG, "info": logging.INFO}
    logging.basicConfig(level=levels.get(level, logging.WARNING), format="%(levelname)s %(name)s: %(message)s")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="haptic-maze", description="Haptic maze exploration simulator")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("run", help="simulate one scenario")
    p.add_argument("scenario")
    p.add_argument("--out", default=None, help="output directory (default: current)")
    p = sub.add_parser("compare", help="run the three stiffness profiles on a maze")
    p.add_argument("maze")
    p.add_argument("--out", default=None)
    p = sub.add_parser("validate", help="check a maze file")
    p.add_argument("maze")
    return parser


def main(argv=None) -> int:
    _configure_logging()
    args = build_parser().parse_args(argv)
    if args.command == "run":
        return cmd_run(args.scenario, args.out)
    if args.command == "compare":
        return cmd_compare(args.maze, args.out)
    return cmd_validate(args.maze)


if __name__ == "__main__":
    sys.exit(main())
