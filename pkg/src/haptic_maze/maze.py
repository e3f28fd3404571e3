"""Planar rigid maze: wall primitives, soft clutter, peg contact queries and
penalty contact forces, plus the YAML maze file format.

Maze file keys (lengths in metres, angles in degrees)::

    peg_radius: 0.005
    start: [x, y]
    goal: [x, y]
    goal_radius: 0.01
    walls:
      - {type: line, p1: [x, y], p2: [x, y]}
      - {type: arc, center: [x, y], radius: r, start_deg: a0, end_deg: a1}
    clutter:
      - {center: [x, y], radius: r, stiffness_scale: 0.3}

Arcs sweep counter-clockwise from ``start_deg`` to ``end_deg``.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Union

import numpy as np
import yaml

TWO_PI = 2.0 * math.pi

DEFAULT_K_WALL = 5.0e4  # N/m
DEFAULT_D_WALL = 100.0  # N s/m
DEFAULT_CLUTTER_SCALE = 0.3
DEFAULT_PEG_RADIUS = 0.005  # m


class ParseError(ValueError):
    def __init__(self, message: str, source: str = "<text>", line: int | None = None):
        self.source = source
        self.line = line
        where = f"{source}:{line}" if line is not None else source
        super().__init__(f"{where}: {message}")


class ValidationError(ValueError):
    pass


@dataclass(frozen=True)
class LinearSegment:
    p1: tuple
    p2: tuple

    def __post_init__(self):
        if math.isclose(self.p1[0], self.p2[0], abs_tol=1e-12) and math.isclose(self.p1[1], self.p2[1], abs_tol=1e-12):
            raise ValidationError(f"line segment endpoints coincide at {self.p1}")

    def closest_point(self, px: float, py: float) -> tuple[float, float, bool]:
        """Closest point to ``(px, py)`` and whether it was clamped to an endpoint."""
        x1, y1 = self.p1[0], self.p1[1]
        dx, dy = self.p2[0] - x1, self.p2[1] - y1
        u = ((px - x1) * dx + (py - y1) * dy) / (dx * dx + dy * dy)
        if u <= 0.0:
            return x1, y1, True
        if u >= 1.0:
            return self.p2[0], self.p2[1], True
        return x1 + u * dx, y1 + u * dy, False

    def surface_normal(self, qx: float, qy: float) -> tuple[float, float]:
        dx, dy = self.p2[0] - self.p1[0], self.p2[1] - self.p1[1]
        n = math.hypot(dx, dy)
        return -dy / n, dx / n

    def bounds(self) -> tuple[float, float, float, float]:
        return (min(self.p1[0], self.p2[0]), min(self.p1[1], self.p2[1]),
                max(self.p1[0], self.p2[0]), max(self.p1[1], self.p2[1]))

    def sample(self, n: int) -> np.ndarray:
        t = np.linspace(0.0, 1.0, n)[:, None]
        return (1 - t) * np.asarray(self.p1[:2]) + t * np.asarray(self.p2[:2])


@dataclass(frozen=True)
class Arc:
    center: tuple
    radius: float
    start_angle: float  # rad
    end_angle: float  # rad

    def __post_init__(self):
        if not self.radius > 0.0:
            raise ValidationError(f"arc radius must be positive, got {self.radius!r}")
        if not self.end_angle > self.start_angle:
            raise ValidationError("arc end angle must be greater than its start angle")
        if self.end_angle - self.start_angle > TWO_PI + 1e-12:
            raise ValidationError("arc sweeps more than a full turn")

    def _point_at(self, a: float) -> tuple[float, float]:
        return self.center[0] + self.radius * math.cos(a), self.center[1] + self.radius * math.sin(a)

    def closest_point(self, px: float, py: float) -> tuple[float, float, bool]:
        cx, cy = self.center[0], self.center[1]
        rx, ry = px - cx, py - cy
        if rx == 0.0 and ry == 0.0:
            return (*self._point_at(0.5 * (self.start_angle + self.end_angle)), False)
        a = math.atan2(ry, rx)
        offset = (a - self.start_angle) % TWO_PI
        if offset <= self.end_angle - self.start_angle:
            rr = math.hypot(rx, ry)
            return cx + self.radius * rx / rr, cy + self.radius * ry / rr, False
        sx, sy = self._point_at(self.start_angle)
        ex, ey = self._point_at(self.end_angle)
        if (px - sx) ** 2 + (py - sy) ** 2 <= (px - ex) ** 2 + (py - ey) ** 2:
            return sx, sy, True
        return ex, ey, True

    def surface_normal(self, qx: float, qy: float) -> tuple[float, float]:
        nx, ny = qx - self.center[0], qy - self.center[1]
        n = math.hypot(nx, ny)
        return nx / n, ny / n

    def bounds(self) -> tuple[float, float, float, float]:
        # bounding box of the full circle, cheap and conservative
        cx, cy, r = self.center[0], self.center[1], self.radius
        return cx - r, cy - r, cx + r, cy + r

    def sample(self, n: int) -> np.ndarray:
        a = np.linspace(self.start_angle, self.end_angle, n)
        return np.column_stack((self.center[0] + self.radius * np.cos(a), self.center[1] + self.radius * np.sin(a)))


WallPrimitive = Union[LinearSegment, Arc]


@dataclass(frozen=True)
class Clutter:
    """Soft disc obstacle; its contact stiffness is the wall stiffness times
    ``stiffness_scale``."""

    center: tuple
    radius: float
    stiffness_scale: float = DEFAULT_CLUTTER_SCALE

    def __post_init__(self):
        if not self.radius > 0.0:
            raise ValidationError(f"clutter radius must be positive, got {self.radius!r}")
        if not (0.0 < self.stiffness_scale <= 1.0):
            raise ValidationError(f"clutter stiffness_scale must lie in (0, 1], got {self.stiffness_scale!r}")


@dataclass(frozen=True)
class Contact:
    normal: np.ndarray  # unit, from the surface towards the peg centre
    depth: float  # m
    source: tuple  # ("wall", i) or ("clutter", i)
    scale: float = 1.0


@dataclass(frozen=True)
class Maze:
    walls: tuple = ()
    clutter: tuple = ()
    start: tuple = (0.0, 0.0, 0.0)
    goal: tuple = (0.0, 0.0, 0.0)
    goal_radius: float = 0.01
    peg_radius: float = DEFAULT_PEG_RADIUS
    name: str = ""
    _wall_boxes: tuple = field(default=(), repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "walls", tuple(self.walls))
        object.__setattr__(self, "clutter", tuple(self.clutter))
        object.__setattr__(self, "start", _planar(self.start))
        object.__setattr__(self, "goal", _planar(self.goal))
        if not self.goal_radius > 0.0:
            raise ValidationError(f"goal_radius must be positive, got {self.goal_radius!r}")
        if not self.peg_radius > 0.0:
            raise ValidationError(f"peg_radius must be positive, got {self.peg_radius!r}")
        object.__setattr__(self, "_wall_boxes", tuple(w.bounds() for w in self.walls))

    def validate(self) -> "Maze":
        """Check the start and goal poses are collision-free; returns self."""
        for label, point in (("start", self.start), ("goal", self.goal)):
            if contact_query(np.array(point), self):
                raise ValidationError(f"{label} not collision-free")
        return self

    def bounding_box(self) -> tuple[float, float, float, float]:
        xs = [self.start[0], self.goal[0]]
        ys = [self.start[1], self.goal[1]]
        for w in self.walls:
            pts = w.sample(65)
            xs.extend(pts[:, 0])
            ys.extend(pts[:, 1])
        for c in self.clutter:
            xs.extend((c.center[0] - c.radius, c.center[0] + c.radius))
            ys.extend((c.center[1] - c.radius, c.center[1] + c.radius))
        return min(xs), min(ys), max(xs), max(ys)


def _planar(p) -> tuple:
    p = tuple(float(c) for c in p)
    if len(p) == 2:
        return p + (0.0,)
    if len(p) != 3 or p[2] != 0.0:
        raise ValidationError(f"expected a planar point, got {p!r}")
    return p


def contact_query(peg_center: np.ndarray, maze: Maze) -> list[Contact]:
    """Contacts between the peg disc and every wall or clutter item it overlaps.

    Walls sharing an endpoint that is the closest point for both report a
    single contact there instead of two identical ones.
    """
    px, py = float(peg_center[0]), float(peg_center[1])
    r = maze.peg_radius
    contacts = []
    seen_vertices = set()
    for i, (wall, (x0, y0, x1, y1)) in enumerate(zip(maze.walls, maze._wall_boxes)):
        if px < x0 - r or px > x1 + r or py < y0 - r or py > y1 + r:
            continue
        qx, qy, at_end = wall.closest_point(px, py)
        dx, dy = px - qx, py - qy
        d = math.hypot(dx, dy)
        if d >= r:
            continue
        if at_end:
            key = (round(qx, 12), round(qy, 12))
            if key in seen_vertices:
                continue
            seen_vertices.add(key)
        if d > 0.0:
            n = (dx / d, dy / d)
        else:
            n = wall.surface_normal(qx, qy)
        contacts.append(Contact(np.array([n[0], n[1], 0.0]), r - d, ("wall", i)))
    for i, c in enumerate(maze.clutter):
        dx, dy = px - c.center[0], py - c.center[1]
        dc = math.hypot(dx, dy)
        depth = r + c.radius - dc
        if depth <= 0.0:
            continue
        n = (dx / dc, dy / dc) if dc > 0.0 else (1.0, 0.0)
        contacts.append(Contact(np.array([n[0], n[1], 0.0]), depth, ("clutter", i), c.stiffness_scale))
    return contacts


def contact_force(contacts, peg_velocity: np.ndarray, k_wall: float = DEFAULT_K_WALL,
                  d_wall: float = DEFAULT_D_WALL) -> np.ndarray:
    """Penalty spring-damper force the environment applies to the peg.

    Normal damping only acts while the peg approaches a surface, and no
    contact ever pulls the peg towards the surface.
    """
    fx = fy = fz = 0.0
    for c in contacts:
        n = c.normal
        fn = k_wall * c.scale * c.depth
        vn = peg_velocity[0] * n[0] + peg_velocity[1] * n[1] + peg_velocity[2] * n[2]
        if vn < 0.0:
            fn -= d_wall * c.scale * vn
        if fn <= 0.0:
            continue
        fx += fn * n[0]
        fy += fn * n[1]
        fz += fn * n[2]
    return np.array([fx, fy, fz])


# maze file loading

_TOP_KEYS = {"name", "peg_radius", "start", "goal", "goal_radius", "walls", "clutter"}
_REQUIRED_TOP = {"start", "goal", "goal_radius", "walls"}
_LINE_KEYS = {"type", "p1", "p2"}
_ARC_KEYS = {"type", "center", "radius", "start_deg", "end_deg"}
_CLUTTER_KEYS = {"center", "radius", "stiffness_scale"}


class LineDict(dict):
    """Mapping that remembers the (1-based) line it started on."""

    line: int | None = None


class _LineLoader(yaml.SafeLoader):
    pass


def _construct_mapping(loader, node):
    loader.flatten_mapping(node)
    d = LineDict(loader.construct_pairs(node, deep=True))
    if len(d) != len(node.value):
        raise ParseError("duplicate key in mapping", line=node.start_mark.line + 1)
    d.line = node.start_mark.line + 1
    return d


_LineLoader.add_constructor(yaml.resolver.BaseResolver.DEFAULT_MAPPING_TAG, _construct_mapping)


def parse_document(text: str, source: str = "<text>") -> LineDict:
    """Parse one YAML mapping with line tracking, as used by maze and scenario files."""
    try:
        data = yaml.load(text, Loader=_LineLoader)
    except ParseError as exc:
        raise ParseError(str(exc).split(": ", 1)[1], source, exc.line) from None
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        line = mark.line + 1 if mark is not None else None
        problem = getattr(exc, "problem", None) or str(exc)
        raise ParseError(f"malformed document: {problem}", source, line) from None
    if not isinstance(data, dict):
        raise ParseError("top level must be a mapping", source, 1)
    return data


class _Fields:
    """Typed field access on a parsed mapping, with file/line diagnostics."""

    def __init__(self, data: dict, where: str, source: str, allowed: set, required: set):
        self.data = data
        self.where = where
        self.source = source
        self.line = getattr(data, "line", None)
        unknown = sorted(set(data) - allowed)
        if unknown:
            self.fail(f"unknown key(s) {', '.join(map(str, unknown))}")
        missing = sorted(required - set(data))
        if missing:
            self.fail(f"missing key(s) {', '.join(missing)}")

    def fail(self, message: str):
        raise ParseError(f"{self.where}: {message}", self.source, self.line)

    def number(self, key: str, default=None) -> float:
        v = self.data.get(key, default)
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
            self.fail(f"'{key}' must be a finite number, got {v!r}")
        return float(v)

    def point(self, key: str, default=None) -> tuple:
        v = self.data.get(key, default)
        if (not isinstance(v, (list, tuple)) or len(v) not in (2, 3)
                or not all(isinstance(c, (int, float)) and not isinstance(c, bool) and math.isfinite(c) for c in v)):
            self.fail(f"'{key}' must be a list of 2 numbers, got {v!r}")
        if len(v) == 3 and v[2] != 0:
            self.fail(f"'{key}' must lie in the z = 0 plane")
        return (float(v[0]), float(v[1]), 0.0)


def _parse_maze(data: dict, source: str) -> Maze:
    top = _Fields(data, "maze", source, _TOP_KEYS, _REQUIRED_TOP)
    walls = []
    raw_walls = data.get("walls") or []
    if not isinstance(raw_walls, list):
        top.fail("'walls' must be a list")
    for i, w in enumerate(raw_walls):
        where = f"walls[{i}]"
        if not isinstance(w, dict):
            raise ParseError(f"{where}: must be a mapping", source, top.line)
        kind = w.get("type")
        try:
            if kind == "line":
                f = _Fields(w, where, source, _LINE_KEYS, _LINE_KEYS)
                walls.append(LinearSegment(f.point("p1"), f.point("p2")))
            elif kind == "arc":
                f = _Fields(w, where, source, _ARC_KEYS, _ARC_KEYS)
                walls.append(Arc(f.point("center"), f.number("radius"),
                                 math.radians(f.number("start_deg")), math.radians(f.number("end_deg"))))
            else:
                raise ParseError(f"{where}: 'type' must be 'line' or 'arc', got {kind!r}", source, getattr(w, "line", None))
        except ValidationError as exc:
            raise ValidationError(f"{source}:{getattr(w, 'line', '?')}: {where}: {exc}") from None
    clutter = []
    raw_clutter = data.get("clutter") or []
    if not isinstance(raw_clutter, list):
        top.fail("'clutter' must be a list")
    for i, c in enumerate(raw_clutter):
        where = f"clutter[{i}]"
        if not isinstance(c, dict):
            raise ParseError(f"{where}: must be a mapping", source, top.line)
        f = _Fields(c, where, source, _CLUTTER_KEYS, {"center", "radius"})
        try:
            clutter.append(Clutter(f.point("center"), f.number("radius"),
                                   f.number("stiffness_scale", DEFAULT_CLUTTER_SCALE)))
        except ValidationError as exc:
            raise ValidationError(f"{source}:{getattr(c, 'line', '?')}: {where}: {exc}") from None
    name = data.get("name", Path(source).stem if source != "<text>" else "")
    try:
        maze = Maze(
            walls=walls,
            clutter=clutter,
            start=top.point("start"),
            goal=top.point("goal"),
            goal_radius=top.number("goal_radius"),
            peg_radius=top.number("peg_radius", DEFAULT_PEG_RADIUS),
            name=str(name),
        )
        return maze.validate()
    except ValidationError as exc:
        raise ValidationError(f"{source}: {exc}") from None


def load_maze(source: Union[str, os.PathLike]) -> Maze:
    """Load and validate a maze from a file path or from YAML text.

    A ``str`` naming an existing file is read as a path; any other string is
    parsed as the document itself.
    """
    if isinstance(source, os.PathLike) or (isinstance(source, str) and "\n" not in source and os.path.isfile(source)):
        path = Path(source)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise ParseError(f"cannot read maze file: {exc.strerror}", str(path)) from None
        return _parse_maze(parse_document(text, str(path)), str(path))
    return _parse_maze(parse_document(source), "<text>")


BUNDLED_MAZES = ("maze1", "maze1-cluttered", "maze2", "maze3")


def bundled_path(filename: str) -> Path:
    return Path(str(resources.files("haptic_maze") / "data" / filename))


def bundled_maze(name: str) -> Maze:
    if name not in BUNDLED_MAZES:
        raise KeyError(f"no bundled maze {name!r}; choose from {', '.join(BUNDLED_MAZES)}")
    return load_maze(bundled_path(f"{name}.yaml"))
