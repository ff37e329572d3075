"""Configuration space tests: metric, interpolation, sampling, local planner.

The local planner is checked against an independent recursive-subdivision
oracle on real scene geometry.
"""

import math

import numpy as np
import pytest

from pathmerge.cspace import (
    Config,
    MetricWeights,
    config,
    config_distance,
    config_from_array,
    interpolate,
    is_free,
    local_plan,
    sample_uniform,
)
from pathmerge.geometry import Pose2, signed_angle_diff
from pathmerge.scene import make_grid_scene, make_maze_scene

W = MetricWeights(1.0, 0.5)


class TestMetric:
    def test_zero_on_identical(self):
        c = config((1.0, 2.0, 0.7))
        assert config_distance(c, c, W) == 0.0

    def test_translation_only(self):
        a, b = config((0.0, 0.0, 0.0)), config((3.0, 4.0, 0.0))
        assert config_distance(a, b, MetricWeights(1.0, 0.0)) == pytest.approx(5.0)

    def test_rotation_wraps(self):
        a, b = config((0, 0, 0.1)), config((0, 0, 2 * math.pi - 0.1))
        d = config_distance(a, b, W)
        assert d == pytest.approx(math.sqrt(0.5 * 0.2 ** 2), abs=1e-12)

    def test_antipodal_rotation(self):
        a, b = config((0, 0, 0.0)), config((0, 0, math.pi))
        assert config_distance(a, b, W) == pytest.approx(math.sqrt(0.5) * math.pi)

    def test_symmetry_and_triangle(self):
        rng = np.random.default_rng(4)
        for _ in range(200):
            pts = [config((x, y, t)) for x, y, t in
                   zip(rng.uniform(-5, 5, 3), rng.uniform(-5, 5, 3),
                       rng.uniform(0, 2 * math.pi, 3))]
            a, b, c = pts
            assert config_distance(a, b, W) == config_distance(b, a, W)
            assert config_distance(a, c, W) <= (
                config_distance(a, b, W) + config_distance(b, c, W) + 1e-12)

    def test_multi_body_accumulates(self):
        a = config((0, 0, 0), (0, 0, 0))
        b = config((1, 0, 0), (0, 1, 0))
        assert config_distance(a, b, MetricWeights(1.0, 0.0)) == pytest.approx(math.sqrt(2))

    def test_body_count_mismatch(self):
        with pytest.raises(ValueError):
            config_distance(config((0, 0, 0)), config((0, 0, 0), (1, 1, 0)), W)

    def test_weight_validation(self):
        with pytest.raises(ValueError):
            MetricWeights(0.0, 1.0)
        with pytest.raises(ValueError):
            MetricWeights(1.0, -0.1)


class TestInterpolation:
    def test_endpoints_exact(self):
        a, b = config((0, 0, 0.2)), config((4, 2, 5.9))
        assert interpolate(a, b, 0.0) == a
        assert interpolate(a, b, 1.0) == b

    def test_rejects_out_of_range(self):
        a, b = config((0, 0, 0)), config((1, 0, 0))
        with pytest.raises(ValueError):
            interpolate(a, b, 1.5)

    def test_distance_linear_in_t(self):
        rng = np.random.default_rng(6)
        for _ in range(50):
            a = config((rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(0, 2 * math.pi)))
            b = config((rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(0, 2 * math.pi)))
            d = config_distance(a, b, W)
            for t in (0.25, 0.5, 0.75):
                m = interpolate(a, b, t)
                assert config_distance(a, m, W) == pytest.approx(t * d, abs=1e-9)

    def test_rotation_takes_shortest_arc(self):
        a, b = config((0, 0, 0.2)), config((0, 0, 2 * math.pi - 0.2))
        mid = interpolate(a, b, 0.5)
        # shortest arc crosses zero, so the midpoint sits at exactly 0
        assert mid.poses[0].theta == pytest.approx(0.0, abs=1e-12)

    def test_antipodal_goes_positive(self):
        a, b = config((0, 0, 0.0)), config((0, 0, math.pi))
        mid = interpolate(a, b, 0.5)
        assert mid.poses[0].theta == pytest.approx(math.pi / 2)


class TestConfig:
    def test_round_trip_array(self):
        c = config((1, 2, 0.5), (3, 4, 1.5))
        assert config_from_array(c.to_array()) == c

    def test_dof(self):
        assert config((0, 0, 0)).dof == 3
        assert config((0, 0, 0), (1, 1, 1)).dof == 6


def _recursive_local_plan(scene, a, b, eps):
    """Reference oracle: depth-first midpoint subdivision."""
    if not (is_free(scene, a) and is_free(scene, b)):
        return False

    def rec(lo, hi):
        if config_distance(lo, hi, scene.weights) <= eps:
            return True
        mid = interpolate(lo, hi, 0.5)
        if not is_free(scene, mid):
            return False
        return rec(lo, mid) and rec(mid, hi)

    return rec(a, b)


class TestLocalPlan:
    def test_matches_recursive_oracle(self):
        scene = make_maze_scene()
        rng = np.random.default_rng(17)
        agreements_true = agreements_false = 0
        pairs = []
        for _ in range(60):
            pairs.append((sample_uniform(scene, rng), sample_uniform(scene, rng)))
        # long random maze segments are almost always blocked; add nearby
        # pairs so the success branch gets real coverage too
        while len(pairs) < 90:
            a = sample_uniform(scene, rng)
            if not is_free(scene, a):
                continue
            dx, dy = rng.uniform(-1.5, 1.5, size=2)
            b = Config((Pose2(a.poses[0].x + dx, a.poses[0].y + dy,
                              a.poses[0].theta),))
            pairs.append((a, b))
        for a, b in pairs:
            got = local_plan(scene, a, b, scene.eps_res)
            want = _recursive_local_plan(scene, a, b, scene.eps_res)
            assert got == want
            agreements_true += want
            agreements_false += not want
        assert agreements_true > 5 and agreements_false > 5

    def test_short_segment_trivially_valid(self):
        scene = make_maze_scene()
        a = scene.start
        b = interpolate(scene.start, scene.goal, 1e-6)
        assert local_plan(scene, a, b, scene.eps_res)

    def test_colliding_endpoint_fails(self):
        scene = make_maze_scene()
        inside = config((5.0, 2.5, 0.0))  # inside the first tooth
        assert not is_free(scene, inside)
        assert not local_plan(scene, scene.start, inside, scene.eps_res)

    def test_finer_eps_implies_coarser(self):
        scene = make_maze_scene()
        rng = np.random.default_rng(23)
        for _ in range(40):
            a, b = sample_uniform(scene, rng), sample_uniform(scene, rng)
            if local_plan(scene, a, b, scene.eps_res / 2):
                # finer grid contains the coarser grid's checkpoints
                assert local_plan(scene, a, b, scene.eps_res)

    def test_rejects_bad_eps(self):
        scene = make_maze_scene()
        with pytest.raises(ValueError):
            local_plan(scene, scene.start, scene.goal, 0.0)


class TestSampling:
    def test_samples_in_bounds(self):
        # raw uniform draws; collision filtering is the planners' job
        scene = make_maze_scene()
        rng = np.random.default_rng(31)
        x0, y0, x1, y1 = scene.bounds
        for _ in range(100):
            c = sample_uniform(scene, rng)
            for pose in c.poses:
                assert x0 <= pose.x <= x1
                assert y0 <= pose.y <= y1

    def test_coordinate_means_match_uniform(self):
        scene = make_maze_scene()
        rng = np.random.default_rng(33)
        n = 10_000
        xs = np.empty(n)
        ys = np.empty(n)
        for i in range(n):
            c = sample_uniform(scene, rng)
            xs[i] = c.poses[0].x
            ys[i] = c.poses[0].y
        x0, y0, x1, y1 = scene.bounds
        # standard error of the mean for U(a,b) is (b-a)/sqrt(12 n)
        for vals, lo, hi in ((xs, x0, x1), (ys, y0, y1)):
            se = (hi - lo) / math.sqrt(12.0 * n)
            assert abs(vals.mean() - (lo + hi) / 2.0) < 5.0 * se

    def test_quadrant_coverage(self):
        # crude uniformity: each quadrant of the maze gets a decent share
        scene = make_maze_scene()
        rng = np.random.default_rng(37)
        x0, y0, x1, y1 = scene.bounds
        counts = np.zeros(4)
        n = 400
        for _ in range(n):
            c = sample_uniform(scene, rng)
            q = (c.poses[0].x > (x0 + x1) / 2) + 2 * (c.poses[0].y > (y0 + y1) / 2)
            counts[q] += 1
        # free area per quadrant is 15-35% of total; 5 sigma binomial slack
        for k in range(4):
            p = counts[k] / n
            assert 0.05 < p < 0.50

    def test_theta_fixed_when_rotation_unweighted(self):
        scene = make_maze_scene()
        assert scene.weights.w_rot == 0.0
        rng = np.random.default_rng(41)
        for _ in range(20):
            c = sample_uniform(scene, rng)
            assert c.poses[0].theta == scene.start.poses[0].theta

    def test_theta_varies_when_rotation_weighted(self):
        scene = make_grid_scene()
        assert scene.weights.w_rot > 0
        rng = np.random.default_rng(43)
        thetas = {round(sample_uniform(scene, rng).poses[0].theta, 3)
                  for _ in range(30)}
        assert len(thetas) > 10
