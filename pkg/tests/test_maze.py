import math
import textwrap

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from haptic_maze.maze import (
    BUNDLED_MAZES,
    Arc,
    Clutter,
    Contact,
    LinearSegment,
    Maze,
    ParseError,
    ValidationError,
    bundled_maze,
    contact_force,
    contact_query,
    load_maze,
)

Z = np.zeros(3)


def p3(x, y):
    return np.array([x, y, 0.0])


def floor_maze(r=0.01):
    return Maze(walls=[LinearSegment((-1, 0), (1, 0))], start=(0, 0.5), goal=(0.5, 0.5), peg_radius=r)


class TestPrimitives:
    def test_zero_length_segment(self):
        with pytest.raises(ValidationError):
            LinearSegment((0.1, 0.2), (0.1, 0.2))

    @pytest.mark.parametrize("kw", [dict(radius=0.0), dict(radius=-1.0), dict(end_angle=0.0), dict(end_angle=7.0)])
    def test_bad_arc(self, kw):
        args = dict(center=(0, 0), radius=0.1, start_angle=0.0, end_angle=1.0)
        args.update(kw)
        with pytest.raises(ValidationError):
            Arc(**args)

    def test_bad_clutter(self):
        with pytest.raises(ValidationError):
            Clutter((0, 0), 0.0)
        with pytest.raises(ValidationError):
            Clutter((0, 0), 0.01, 1.5)

    def test_arc_closest(self):
        a = Arc((0, 0), 0.1, 0.0, math.pi / 2)
        qx, qy, end = a.closest_point(0.2, 0.2)
        assert (qx, qy) == pytest.approx((0.1 / math.sqrt(2), 0.1 / math.sqrt(2)))
        assert not end
        qx, qy, end = a.closest_point(0.05, -0.2)
        assert (qx, qy) == pytest.approx((0.1, 0.0)) and end

    def test_arc_wraps_through_zero(self):
        a = Arc((0, 0), 0.1, math.radians(300), math.radians(420))
        qx, qy, end = a.closest_point(0.3, 0.0)
        assert (qx, qy) == pytest.approx((0.1, 0.0)) and not end


class TestContactQuery:
    def test_separated(self):
        assert contact_query(p3(0, 0.05), floor_maze()) == []

    def test_penetration(self):
        (c,) = contact_query(p3(0, 0.005), floor_maze())
        assert c.depth == pytest.approx(0.005)
        np.testing.assert_allclose(c.normal, [0, 1, 0])
        assert c.source == ("wall", 0)

    def test_l_inner_corner(self):
        m = Maze(walls=[LinearSegment((0, 0), (1, 0)), LinearSegment((0, 0), (0, 1))],
                 start=(0.5, 0.5), goal=(0.6, 0.5), peg_radius=0.01)
        cs = contact_query(p3(0.005, 0.005), m)
        assert len(cs) == 2
        for c in cs:
            assert c.depth == pytest.approx(0.005)
        assert cs[0].normal @ cs[1].normal == pytest.approx(0.0, abs=1e-12)
        normals = sorted(tuple(np.round(c.normal, 12)) for c in cs)
        assert normals == [(0.0, 1.0, 0.0), (1.0, 0.0, 0.0)]

    def test_shared_vertex_reported_once(self):
        # outer side of an L corner: both segments are closest at the vertex
        m = Maze(walls=[LinearSegment((0, 0), (1, 0)), LinearSegment((0, 0), (0, 1))],
                 start=(0.5, 0.5), goal=(0.6, 0.5), peg_radius=0.01)
        cs = contact_query(p3(-0.003, -0.004), m)
        assert len(cs) == 1
        assert cs[0].depth == pytest.approx(0.005)
        np.testing.assert_allclose(cs[0].normal, [-0.6, -0.8, 0], atol=1e-12)

    def test_clutter_contact(self):
        m = Maze(clutter=[Clutter((0.0, 0.0), 0.004, 0.3)], start=(0.5, 0), goal=(0.6, 0), peg_radius=0.005)
        (c,) = contact_query(p3(0.008, 0.0), m)
        assert c.depth == pytest.approx(0.001)
        assert c.scale == 0.3 and c.source == ("clutter", 0)
        np.testing.assert_allclose(c.normal, [1, 0, 0])

    def test_dense_sampling_oracle(self):
        walls = [
            LinearSegment((0.0, 0.0), (0.05, 0.01)),
            LinearSegment((0.05, 0.01), (0.06, 0.05)),
            Arc((0.02, 0.04), 0.02, math.radians(20), math.radians(250)),
            Arc((0.08, 0.0), 0.015, math.radians(-90), math.radians(135)),
        ]
        rng = np.random.default_rng(11)
        pegs = rng.uniform([-0.02, -0.03], [0.11, 0.08], size=(300, 2))
        worst = 0.0
        for w in walls:
            dense = w.sample(10_000)
            for px, py in pegs:
                qx, qy, _ = w.closest_point(px, py)
                d = math.hypot(px - qx, py - qy)
                ref = np.min(np.hypot(dense[:, 0] - px, dense[:, 1] - py))
                worst = max(worst, abs(d - ref))
        assert worst < 1e-6

    def test_contacts_match_oracle(self):
        walls = [LinearSegment((0.0, 0.0), (0.04, 0.0)), Arc((0.06, 0.0), 0.02, math.radians(180), math.radians(360))]
        m = Maze(walls=walls, start=(0, 0.5), goal=(0.1, 0.5), peg_radius=0.005)
        rng = np.random.default_rng(3)
        dense = [w.sample(10_000) for w in walls]
        for px, py in rng.uniform([-0.01, -0.03], [0.09, 0.01], size=(500, 2)):
            ref = [float(np.min(np.hypot(s[:, 0] - px, s[:, 1] - py))) for s in dense]
            got = {c.source[1]: c for c in contact_query(p3(px, py), m)}
            for i, d in enumerate(ref):
                if d < 0.005 - 1e-6:
                    # the shared vertex at (0.04, 0) may be reported by just one wall
                    if i not in got:
                        assert abs(math.hypot(px - 0.04, py) - d) < 1e-6
                        continue
                    assert got[i].depth == pytest.approx(0.005 - d, abs=1e-6)
                    assert np.linalg.norm(got[i].normal) == pytest.approx(1.0)
                elif d > 0.005 + 1e-6:
                    assert i not in got


class TestContactForce:
    def test_spring(self):
        c = Contact(p3(0, 1), 0.001, ("wall", 0))
        np.testing.assert_allclose(contact_force([c], Z, 5e4), [0, 50, 0])

    def test_empty(self):
        np.testing.assert_array_equal(contact_force([], p3(1, 1)), Z)

    def test_receding_has_no_damping(self):
        c = Contact(p3(0, 1), 0.002, ("wall", 0))
        np.testing.assert_allclose(contact_force([c], p3(0.3, 5.0), 5e4, 100), [0, 100, 0])

    def test_approaching_damps(self):
        c = Contact(p3(0, 1), 0.002, ("wall", 0))
        np.testing.assert_allclose(contact_force([c], p3(0, -0.1), 5e4, 100), [0, 110, 0])

    def test_clutter_scaled(self):
        c = Contact(p3(1, 0), 0.001, ("clutter", 0), 0.3)
        np.testing.assert_allclose(contact_force([c], p3(-0.1, 0), 5e4, 100), [15 + 3, 0, 0])

    @given(st.floats(0, 0.01), st.floats(-10, 10), st.floats(-10, 10), st.floats(0, 1e3))
    def test_never_pulls(self, depth, vx, vy, d_wall):
        n = p3(0.6, -0.8)
        f = contact_force([Contact(n, depth, ("wall", 0))], p3(vx, vy), 5e4, d_wall)
        assert f @ n >= 0.0
        assert np.linalg.norm(np.cross(f, n)) <= 1e-9 * (1 + np.linalg.norm(f))

    def test_continuous_at_boundary(self):
        m = floor_maze(0.005)
        forces = [np.linalg.norm(contact_force(contact_query(p3(0, y), m), Z)) for y in (0.005 - 1e-9, 0.005, 0.005 + 1e-9)]
        assert max(forces) < 1e-4


MAZE_TEXT = textwrap.dedent("""\
    name: demo
    peg_radius: 0.005
    start: [0.0, 0.0]
    goal: [0.1, 0.0]
    goal_radius: 0.01
    walls:
      - {type: line, p1: [-0.02, -0.015], p2: [0.12, -0.015]}
      - {type: arc, center: [0.05, 0.09], radius: 0.075, start_deg: 200, end_deg: 340}
    clutter:
      - {center: [0.05, 0.0], radius: 0.002}
    """)


class TestLoader:
    def test_loads_text(self):
        m = load_maze(MAZE_TEXT)
        assert m.name == "demo"
        assert isinstance(m.walls[0], LinearSegment) and isinstance(m.walls[1], Arc)
        assert m.walls[1].end_angle == pytest.approx(math.radians(340))
        assert m.clutter[0].stiffness_scale == 0.3
        assert m.start == (0.0, 0.0, 0.0)

    def test_loads_path(self, tmp_path):
        p = tmp_path / "demo.yaml"
        p.write_text(MAZE_TEXT)
        assert load_maze(p) == load_maze(str(p))

    def test_empty_walls(self):
        m = load_maze("start: [0, 0]\ngoal: [0.1, 0]\ngoal_radius: 0.01\nwalls: []\n")
        assert m.walls == () and m.clutter == ()

    def test_unknown_key_has_line(self):
        text = MAZE_TEXT.replace("radius: 0.002}", "radius: 0.002, colour: red}")
        with pytest.raises(ParseError) as exc:
            load_maze(text)
        assert exc.value.line == 10
        assert "colour" in str(exc.value)

    def test_unknown_top_key(self):
        with pytest.raises(ParseError, match="walls_extra"):
            load_maze(MAZE_TEXT + "walls_extra: []\n")

    def test_zero_radius_arc(self):
        with pytest.raises(ValidationError):
            load_maze(MAZE_TEXT.replace("radius: 0.075", "radius: 0"))

    def test_malformed(self):
        with pytest.raises(ParseError) as exc:
            load_maze("start: [0, 0\ngoal: [1, 1]\n")
        assert exc.value.line is not None

    def test_missing_required(self):
        with pytest.raises(ParseError, match="goal_radius"):
            load_maze("start: [0, 0]\ngoal: [0.1, 0]\nwalls: []\n")

    def test_bad_wall_type(self):
        with pytest.raises(ParseError, match="type"):
            load_maze(MAZE_TEXT.replace("type: line", "type: spline"))

    def test_start_in_wall(self):
        with pytest.raises(ValidationError, match="start not collision-free"):
            load_maze(MAZE_TEXT.replace("start: [0.0, 0.0]", "start: [0.0, -0.013]"))

    def test_missing_file(self, tmp_path):
        with pytest.raises(ParseError):
            load_maze(tmp_path / "nope.yaml")


class TestBundled:
    @pytest.mark.parametrize("name", BUNDLED_MAZES)
    def test_loads_and_validates(self, name):
        m = bundled_maze(name)
        assert m.walls
        assert contact_query(np.array(m.start), m) == []
        assert contact_query(np.array(m.goal), m) == []

    def test_cluttered_shares_walls(self):
        assert bundled_maze("maze1-cluttered").walls == bundled_maze("maze1").walls
        assert bundled_maze("maze1-cluttered").clutter

    def test_maze2_mainly_curved(self):
        m = bundled_maze("maze2")
        arcs = [w for w in m.walls if isinstance(w, Arc)]
        assert len(arcs) >= len(m.walls) / 2

    def test_unknown(self):
        with pytest.raises(KeyError):
            bundled_maze("maze9")
