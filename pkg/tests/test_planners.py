"""Planner behavior: PRM cycle policies, RRT, shortcutting, failure values."""

from __future__ import annotations

import json
import math

import numpy as np
import pytest

from pathmerge.cspace import Config, config_distance
from pathmerge.geometry import Pose2
from pathmerge.planners import (
    AllCycles,
    NoCycles,
    Path,
    PlanFailure,
    PrmParams,
    RrtParams,
    UsefulCycles,
    prm_plan,
    rrt_plan,
    shortcut,
    validate_path,
)
from pathmerge.quality import path_length
from pathmerge.scene import load_scene, make_maze_scene


def _empty_scene(start=(1, 1), goal=(9, 9)):
    doc = {
        "bounds": [0, 0, 10, 10],
        "robot_bodies": [[[-0.3, -0.3], [0.3, -0.3], [0.3, 0.3], [-0.3, 0.3]]],
        "obstacles": [],
        "weights": {"w_trans": 1.0, "w_rot": 0.0},
        "query": {
            "start": [[start[0], start[1], 0]],
            "goal": [[goal[0], goal[1], 0]],
        },
        "eps_res": 0.1,
        "clearance_sample_step": 0.05,
    }
    return load_scene(json.dumps(doc))


def _walled_goal_scene():
    # goal sits in a box sealed by two rects plus the workspace corner
    doc = {
        "bounds": [0, 0, 10, 10],
        "robot_bodies": [[[-0.3, -0.3], [0.3, -0.3], [0.3, 0.3], [-0.3, 0.3]]],
        "obstacles": [
            [[7.6, 7.6], [8.0, 7.6], [8.0, 10.0], [7.6, 10.0]],
            [[7.6, 7.6], [10.0, 7.6], [10.0, 8.0], [7.6, 8.0]],
        ],
        "weights": {"w_trans": 1.0, "w_rot": 0.0},
        "query": {"start": [[1, 1, 0]], "goal": [[9, 9, 0]]},
        "eps_res": 0.1,
        "clearance_sample_step": 0.05,
    }
    return load_scene(json.dumps(doc))


class TestPathType:
    def test_needs_two_nodes(self):
        with pytest.raises(ValueError):
            Path([Config((Pose2(0, 0, 0),))])

    def test_body_count_must_match(self):
        with pytest.raises(ValueError):
            Path([
                Config((Pose2(0, 0, 0),)),
                Config((Pose2(1, 0, 0), Pose2(2, 0, 0))),
            ])

    def test_len_and_iter(self):
        nodes = [Config((Pose2(0, 0, 0),)), Config((Pose2(1, 0, 0),))]
        p = Path(nodes)
        assert len(p) == 2
        assert list(p) == nodes


class TestPrm:
    def test_empty_scene_succeeds(self):
        scene = _empty_scene()
        p = prm_plan(scene, PrmParams(n_samples=60, k_neighbors=8, seed=3))
        assert isinstance(p, Path)
        assert p.nodes[0] == scene.start and p.nodes[-1] == scene.goal
        assert validate_path(scene, p)

    def test_start_equals_goal(self):
        scene = _empty_scene(start=(5, 5), goal=(5, 5))
        p = prm_plan(scene, PrmParams(n_samples=10, seed=0))
        assert isinstance(p, Path)
        assert len(p) == 2 and p.nodes[0] == p.nodes[1]

    def test_no_cycles_builds_forest(self):
        stats = {}
        p = prm_plan(
            _empty_scene(),
            PrmParams(n_samples=80, k_neighbors=10, cycle_mode=NoCycles(), seed=5),
            stats=stats,
        )
        assert isinstance(p, Path)
        # forest: edges = nodes - components; empty scene connects everything
        assert stats["edges"] == stats["nodes"] - 1

    def test_cycle_modes_nest_edge_sets(self):
        scene = make_maze_scene()
        counts = {}
        for name, mode in (
            ("none", NoCycles()),
            ("useful", UsefulCycles(3.0)),
            ("all", AllCycles()),
        ):
            stats = {}
            prm_plan(
                scene,
                PrmParams(n_samples=300, k_neighbors=8, cycle_mode=mode, seed=11),
                stats=stats,
            )
            counts[name] = stats
        # same seed, same sample sequence: node sets agree, edge sets nest
        assert counts["none"]["nodes"] == counts["useful"]["nodes"] == counts["all"]["nodes"]
        assert counts["none"]["edges"] <= counts["useful"]["edges"] <= counts["all"]["edges"]
        assert counts["none"]["edges"] <= counts["none"]["nodes"] - 1

    def test_deterministic_given_seed(self):
        scene = make_maze_scene()
        params = PrmParams(n_samples=700, k_neighbors=12, seed=22)
        a = prm_plan(scene, params)
        b = prm_plan(scene, params)
        assert isinstance(a, Path) and isinstance(b, Path)
        assert a.nodes == b.nodes

    def test_failure_carries_diagnostics(self):
        scene = _walled_goal_scene()
        out = prm_plan(scene, PrmParams(n_samples=120, k_neighbors=8, seed=2))
        assert isinstance(out, PlanFailure)
        assert out.components >= 2
        assert math.isfinite(out.closest_gap) and out.closest_gap > 0
        assert "components" in str(out)

    def test_call_budget_respected(self):
        scene = make_maze_scene()
        stats = {}
        out = prm_plan(
            scene,
            PrmParams(n_samples=500, k_neighbors=10, seed=1, max_local_plan_calls=50),
            stats=stats,
        )
        assert stats["local_plan_calls"] <= 50
        # a 50-call roadmap cannot span this maze
        assert isinstance(out, PlanFailure)

    def test_zero_time_budget_fails_fast(self):
        scene = make_maze_scene()
        out = prm_plan(scene, PrmParams(n_samples=500, seed=1, time_budget_s=0.0))
        assert isinstance(out, PlanFailure)

    def test_maze_path_validates(self):
        scene = make_maze_scene()
        p = prm_plan(scene, PrmParams(n_samples=700, k_neighbors=12, seed=8))
        assert isinstance(p, Path)
        assert validate_path(scene, p)


class TestRrt:
    def test_param_validation(self):
        scene = _empty_scene()
        with pytest.raises(ValueError):
            rrt_plan(scene, RrtParams(step=0.0))
        with pytest.raises(ValueError):
            rrt_plan(scene, RrtParams(step=1.0, goal_bias=1.5))

    def test_empty_scene_mostly_succeeds(self):
        scene = _empty_scene()
        ok = 0
        for seed in range(100):
            out = rrt_plan(scene, RrtParams(step=1.5, max_iters=800, seed=seed))
            ok += isinstance(out, Path)
        assert ok >= 95

    def test_full_goal_bias_homes_straight(self):
        scene = _empty_scene()
        stats = {}
        out = rrt_plan(
            scene,
            RrtParams(step=1.0, goal_bias=1.0, max_iters=100, seed=0),
            stats=stats,
        )
        assert isinstance(out, Path)
        dist = config_distance(scene.start, scene.goal, scene.weights)
        assert stats["nodes"] <= math.ceil(dist / 1.0) + 1
        assert abs(path_length(out, scene.weights) - dist) < 1e-9

    def test_walled_goal_fails(self):
        out = rrt_plan(_walled_goal_scene(), RrtParams(step=1.0, max_iters=300, seed=4))
        assert isinstance(out, PlanFailure)
        assert out.local_plan_calls > 0

    def test_deterministic_given_seed(self):
        scene = _empty_scene()
        params = RrtParams(step=1.2, max_iters=500, seed=9)
        a = rrt_plan(scene, params)
        b = rrt_plan(scene, params)
        assert isinstance(a, Path)
        assert a.nodes == b.nodes

    def test_start_equals_goal(self):
        scene = _empty_scene(start=(5, 5), goal=(5, 5))
        out = rrt_plan(scene, RrtParams(step=1.0, seed=0))
        assert isinstance(out, Path)
        assert len(out) == 2 and out.nodes[0] == out.nodes[1]

    def test_path_validates(self):
        scene = make_maze_scene()
        out = rrt_plan(scene, RrtParams(step=0.8, max_iters=4000, seed=12))
        if isinstance(out, Path):
            assert validate_path(scene, out)
            assert out.nodes[0] == scene.start and out.nodes[-1] == scene.goal


class TestShortcut:
    def _zigzag(self):
        pts = [(1, 1), (9, 1), (1, 9), (9, 9)]
        return Path([Config((Pose2(x, y, 0.0),)) for x, y in pts])

    def test_zero_iters_identity(self):
        scene = _empty_scene()
        p = self._zigzag()
        assert shortcut(scene, p, iters=0).nodes == p.nodes

    def test_two_node_path_unchanged(self):
        scene = _empty_scene()
        p = Path([scene.start, scene.goal])
        assert shortcut(scene, p, iters=50, seed=1).nodes == p.nodes

    def test_zigzag_straightens(self):
        scene = _empty_scene()
        p = self._zigzag()
        out = shortcut(scene, p, iters=200, seed=3)
        straight = config_distance(p.nodes[0], p.nodes[-1], scene.weights)
        assert path_length(out, scene.weights) <= 1.05 * straight

    def test_never_lengthens(self):
        scene = _empty_scene()
        rng = np.random.default_rng(17)
        for rep in range(20):
            pts = rng.uniform(1, 9, size=(6, 2))
            p = Path([Config((Pose2(float(x), float(y), 0.0),)) for x, y in pts])
            out = shortcut(scene, p, iters=40, seed=rep)
            assert path_length(out, scene.weights) <= path_length(p, scene.weights) + 1e-12
            assert validate_path(scene, out)

    def test_endpoints_preserved(self):
        scene = _empty_scene()
        p = self._zigzag()
        out = shortcut(scene, p, iters=100, seed=5)
        assert out.nodes[0] == p.nodes[0] and out.nodes[-1] == p.nodes[-1]

    def test_negative_iters_rejected(self):
        scene = _empty_scene()
        with pytest.raises(ValueError):
            shortcut(scene, self._zigzag(), iters=-1)
