"""Quality measures: exact identities, analytic fixtures, refinement checks.

Fixtures engineer known clearance profiles (a long wall with paths parallel
or perpendicular to it) so expected values can be derived independently from
scene_clearance probes or closed forms.
"""

from __future__ import annotations

import math

import numpy as np
import pytest

from pathmerge.cspace import Config, MetricWeights, interpolate
from pathmerge.geometry import Polygon, Pose2, scene_clearance
from pathmerge.planners import Path
from pathmerge.quality import (
    AVG_CLEARANCE,
    BOTTLENECK,
    LENGTH,
    QualityMeasure,
    at_least_as_good,
    average_clearance,
    bottleneck_clearance,
    clearance_floor,
    edge_grid_ts,
    edge_kinv_term,
    edge_midpoint_ts,
    edge_sample_count,
    evaluate_measure,
    integrated_k_inverse_clearance,
    kinv,
    lower_is_better,
    measure_name,
    optimizable,
    parse_measure,
    path_length,
)
from pathmerge.scene import Scene, make_grid_scene, make_maze_scene


def _square(h):
    return Polygon([[-h, -h], [h, -h], [h, h], [-h, h]])


def _wall_scene(step=0.5):
    """One wall along the bottom; clearance above it is y - 1 - 0.2."""
    return Scene(
        bounds=(0.0, 0.0, 20.0, 20.0),
        robot_bodies=[_square(0.2)],
        obstacles=[Polygon([[0, 0], [20, 0], [20, 1], [0, 1]])],
        weights=MetricWeights(1.0, 0.0),
        start=Config((Pose2(2, 5, 0),)),
        goal=Config((Pose2(18, 5, 0),)),
        eps_res=0.1,
        clearance_sample_step=step,
    )


def _p(*pts):
    return Path([Config((Pose2(float(x), float(y), 0.0),)) for x, y in pts])


class TestPathLength:
    def test_three_four_five(self):
        w = MetricWeights(1.0, 0.0)
        assert path_length(_p((0, 0), (3, 4)), w) == 5.0

    def test_repeated_node(self):
        w = MetricWeights(1.0, 0.0)
        assert path_length(_p((2, 2), (2, 2)), w) == 0.0

    def test_grid_scene_weights(self):
        w = make_grid_scene().weights
        assert w.w_trans == 1.0 and w.w_rot == 0.00005


class TestKInverseClearance:
    def test_k_zero_is_length_exactly(self):
        scene = make_maze_scene()
        rng = np.random.default_rng(3)
        for _ in range(20):
            pts = rng.uniform(0.5, 13.5, size=(4, 2))
            p = _p(*pts)
            assert integrated_k_inverse_clearance(scene, p, 0.0) == path_length(
                p, scene.weights
            )

    def test_constant_corridor_closed_form(self):
        # straight run parallel to the wall: clearance 0.8 throughout
        scene = _wall_scene(step=0.5)
        p = _p((2, 2), (8, 2))
        for k in (0.5, 1.0, 3.0):
            want = 6.0 * 0.8 ** (-k)
            got = integrated_k_inverse_clearance(scene, p, k)
            assert math.isclose(got, want, rel_tol=1e-6)

    def test_two_sample_edge_matches_probes(self):
        # short edge toward the wall at step 0.25: exactly two sub-segments
        # whose midpoint clearances we can probe independently
        scene = _wall_scene(step=0.25)
        a = Config((Pose2(5.0, 3.2, 0.0),))
        b = Config((Pose2(5.0, 2.7, 0.0),))
        c1 = scene_clearance(scene, interpolate(a, b, 0.25))
        c2 = scene_clearance(scene, interpolate(a, b, 0.75))
        assert math.isclose(c1, 1.875, abs_tol=1e-12)
        assert math.isclose(c2, 1.625, abs_tol=1e-12)
        p = Path([a, b])
        for k in (1.0, 2.0):
            want = 0.25 * c1 ** (-k) + 0.25 * c2 ** (-k)
            got = integrated_k_inverse_clearance(scene, p, k)
            assert math.isclose(got, want, rel_tol=1e-9)
            finer = integrated_k_inverse_clearance(scene, p, k, refine=10)
            assert abs(finer - got) <= 0.01 * abs(finer)

    def test_negative_k_rejected(self):
        with pytest.raises(ValueError):
            integrated_k_inverse_clearance(_wall_scene(), _p((2, 2), (3, 2)), -1.0)

    def test_grazing_path_stays_finite(self):
        # node touches the wall; the clamp keeps the integrand bounded
        scene = _wall_scene(step=0.5)
        p = _p((5, 1.2), (5, 3.2))
        got = integrated_k_inverse_clearance(scene, p, 3.0)
        assert math.isfinite(got)
        assert got <= 2.0 * clearance_floor(scene) ** (-3.0)


class TestBottleneck:
    def test_gap_clearance_analytic(self):
        # vertical slot of half-width 0.6, square of half-width 0.2
        scene = Scene(
            bounds=(0.0, 0.0, 10.0, 10.0),
            robot_bodies=[_square(0.2)],
            obstacles=[
                Polygon([[0, 4], [4.4, 4], [4.4, 5], [0, 5]]),
                Polygon([[5.6, 4], [10, 4], [10, 5], [5.6, 5]]),
            ],
            weights=MetricWeights(1.0, 0.0),
            start=Config((Pose2(5, 2, 0),)),
            goal=Config((Pose2(5, 7, 0),)),
            eps_res=0.05,
            clearance_sample_step=0.02,
        )
        got = bottleneck_clearance(scene, _p((5, 2), (5, 7)))
        assert abs(got - 0.4) < 0.02

    def test_touching_node_gives_zero(self):
        scene = _wall_scene(step=0.5)
        assert bottleneck_clearance(scene, _p((5, 1.2), (5, 3.2))) == 0.0

    def test_at_most_node_clearance(self):
        # samples include the nodes, so the sampled min cannot exceed any
        # node's clearance
        scene = make_maze_scene()
        rng = np.random.default_rng(11)
        for _ in range(10):
            pts = rng.uniform(0.5, 13.5, size=(3, 2))
            p = _p(*pts)
            node_min = min(scene_clearance(scene, c) for c in p.nodes)
            assert bottleneck_clearance(scene, p) <= node_min + 1e-12

    def test_refinement_stable_on_wide_corridor(self):
        scene = make_maze_scene()
        p = _p((1.0, 12.8), (5.0, 13.0), (12.0, 12.2))
        coarse = bottleneck_clearance(scene, p)
        fine = bottleneck_clearance(scene, p, refine=10)
        assert abs(coarse - fine) <= 0.01 * abs(fine)


class TestAverageClearance:
    def test_constant_corridor(self):
        scene = _wall_scene(step=0.5)
        assert math.isclose(
            average_clearance(scene, _p((2, 2), (8, 2))), 0.8, rel_tol=1e-9
        )

    def test_linear_profile_exact_mean(self):
        # clearance varies linearly along a perpendicular approach, so the
        # midpoint-sampled mean equals the true average of the endpoints
        scene = _wall_scene(step=0.5)
        p = _p((5, 3.2), (5, 2.2))
        c_start = scene_clearance(scene, p.nodes[0])
        c_end = scene_clearance(scene, p.nodes[1])
        want = (c_start + c_end) / 2
        assert math.isclose(average_clearance(scene, p), want, rel_tol=1e-9)

    def test_two_equal_halves(self):
        scene = _wall_scene(step=1.0)
        a = Config((Pose2(5.0, 4.2, 0.0),))
        b = Config((Pose2(5.0, 2.2, 0.0),))
        c1 = scene_clearance(scene, interpolate(a, b, 0.25))
        c2 = scene_clearance(scene, interpolate(a, b, 0.75))
        got = average_clearance(scene, Path([a, b]))
        assert math.isclose(got, (c1 + c2) / 2, rel_tol=1e-12)

    def test_degenerate_path_reports_spot_clearance(self):
        scene = _wall_scene()
        p = _p((5, 3), (5, 3))
        assert math.isclose(
            average_clearance(scene, p), scene_clearance(scene, p.nodes[0]),
            rel_tol=1e-12,
        )

    def test_refinement_stable_in_maze(self):
        scene = make_maze_scene()
        p = _p((1.0, 12.8), (5.0, 13.0), (12.0, 12.2))
        coarse = average_clearance(scene, p)
        fine = average_clearance(scene, p, refine=10)
        assert abs(coarse - fine) <= 0.01 * abs(fine)


class TestEdgeHelpers:
    def test_sample_count(self):
        assert edge_sample_count(1.0, 0.5) == 2
        assert edge_sample_count(1.01, 0.5) == 3
        assert edge_sample_count(0.0, 0.5) == 1

    def test_ts_layouts(self):
        assert np.array_equal(edge_midpoint_ts(2), [0.25, 0.75])
        assert np.array_equal(edge_grid_ts(2), [0.0, 0.5, 1.0])

    def test_k_zero_term_is_length(self):
        rng = np.random.default_rng(5)
        cl = rng.uniform(0.1, 3.0, size=7)
        assert edge_kinv_term(2.37, cl, 0.0, 1e-3) == 2.37

    def test_monotone_in_clearance(self):
        cl = np.array([0.5, 0.8, 1.1])
        base = edge_kinv_term(1.0, cl, 2.0, 1e-3)
        bumped = cl.copy()
        bumped[1] = 1.5
        assert edge_kinv_term(1.0, bumped, 2.0, 1e-3) < base


class TestMeasureNames:
    @pytest.mark.parametrize(
        "name", ["length", "bottleneck", "avg-clearance", "kinv:3", "kinv:0.25"]
    )
    def test_round_trip(self, name):
        assert measure_name(parse_measure(name)) == name

    def test_kinv_exponent_parsed(self):
        m = parse_measure("kinv:2.5")
        assert m.kind == "kinv" and m.k == 2.5

    @pytest.mark.parametrize("bad", ["kinv:", "kinv:x", "foo", "Length"])
    def test_rejects_unknown(self, bad):
        with pytest.raises(ValueError):
            parse_measure(bad)

    def test_direction_flags(self):
        assert lower_is_better(LENGTH) and lower_is_better(kinv(3))
        assert not lower_is_better(BOTTLENECK)
        assert not lower_is_better(AVG_CLEARANCE)
        assert at_least_as_good(LENGTH, 1.0, 2.0)
        assert at_least_as_good(BOTTLENECK, 2.0, 1.0)
        assert at_least_as_good(LENGTH, 1.0, 1.0)

    def test_optimizable(self):
        assert optimizable(LENGTH) and optimizable(BOTTLENECK) and optimizable(kinv(1))
        assert not optimizable(AVG_CLEARANCE)

    def test_measure_validation(self):
        with pytest.raises(ValueError):
            QualityMeasure("energy")
        with pytest.raises(ValueError):
            kinv(-1.0)


class TestEvaluateDispatch:
    def test_matches_direct_functions(self):
        scene = _wall_scene(step=0.5)
        p = _p((2, 2), (8, 2), (8, 4))
        assert evaluate_measure(scene, p, LENGTH) == path_length(p, scene.weights)
        assert evaluate_measure(scene, p, kinv(2)) == integrated_k_inverse_clearance(
            scene, p, 2.0
        )
        assert evaluate_measure(scene, p, BOTTLENECK) == bottleneck_clearance(scene, p)
        assert evaluate_measure(scene, p, AVG_CLEARANCE) == average_clearance(scene, p)
