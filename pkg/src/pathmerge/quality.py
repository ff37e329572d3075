"""Path quality measures: length, clearance integrals, bottleneck, average.

All clearance-based measures sample the path at the scene's
clearance_sample_step.  The integrated inverse-clearance family trades length
against obstacle proximity: k = 0 recovers plain length exactly, large k
approaches pure bottleneck behaviour.  Clearances are clamped from below at
1e-4 of the scene diameter so the integrand stays finite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cspace import Config, MetricWeights, config_distance, interpolate_batch
from .geometry import scene_kernels

_KINDS = ("length", "kinv", "bottleneck", "avg-clearance")

CLEARANCE_FLOOR_FRACTION = 1e-4


@dataclass(frozen=True)
class QualityMeasure:
    kind: str
    k: float = 0.0

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown quality measure kind: {self.kind!r}")
        if self.kind == "kinv" and self.k < 0:
            raise ValueError("k must be non-negative")


LENGTH = QualityMeasure("length")
BOTTLENECK = QualityMeasure("bottleneck")
AVG_CLEARANCE = QualityMeasure("avg-clearance")


def kinv(k: float) -> QualityMeasure:
    return QualityMeasure("kinv", float(k))


def parse_measure(name: str) -> QualityMeasure:
    """Parse a measure spelling: length | kinv:<k> | bottleneck | avg-clearance."""
    if name == "length":
        return LENGTH
    if name == "bottleneck":
        return BOTTLENECK
    if name == "avg-clearance":
        return AVG_CLEARANCE
    if name.startswith("kinv:"):
        try:
            return kinv(float(name.split(":", 1)[1]))
        except ValueError as exc:
            raise ValueError(f"bad kinv exponent in measure {name!r}") from exc
    raise ValueError(f"unknown quality measure {name!r}")


def measure_name(m: QualityMeasure) -> str:
    if m.kind == "kinv":
        return f"kinv:{m.k:g}"
    return m.kind


def lower_is_better(m: QualityMeasure) -> bool:
    return m.kind in ("length", "kinv")


def optimizable(m: QualityMeasure) -> bool:
    """Average clearance is reported for evaluation but is not a graph-search
    objective (it is neither additive nor bottleneck-shaped)."""
    return m.kind != "avg-clearance"


def at_least_as_good(m: QualityMeasure, a: float, b: float) -> bool:
    """True if value a is at least as good as value b under measure m."""
    return a <= b if lower_is_better(m) else a >= b


def clearance_floor(scene) -> float:
    return CLEARANCE_FLOOR_FRACTION * scene.diameter


def path_length(path, weights: MetricWeights) -> float:
    """Sum of metric edge lengths."""
    total = 0.0
    for a, b in zip(path.nodes, path.nodes[1:]):
        total += config_distance(a, b, weights)
    return total


def edge_sample_count(edge_length: float, step: float) -> int:
    """Sub-segment count for one edge at the given sampling step."""
    return max(1, math.ceil(edge_length / step))


def edge_midpoint_ts(n_seg: int) -> np.ndarray:
    """Interpolation parameters of the sub-segment midpoints."""
    return (np.arange(n_seg) + 0.5) / n_seg


def edge_grid_ts(n_seg: int) -> np.ndarray:
    """Interpolation parameters of the sub-segment boundaries, endpoints included."""
    return np.arange(n_seg + 1) / n_seg


def edge_kinv_term(edge_length: float, mid_clearances: np.ndarray, k: float,
                   floor: float) -> float:
    """One edge's contribution to the k-inverse clearance integral.

    edge_length times the mean of clamp(clearance)**-k over the sub-segment
    midpoints; with k = 0 the mean is exactly 1 so the term is the length.
    Shared with graph-edge weighting so graph costs and standalone evaluation
    agree bit for bit.
    """
    cl = np.maximum(mid_clearances, floor)
    return edge_length * float(np.mean(cl ** (-k)))


def _edge_clearances(scene, a: Config, b: Config, ts: np.ndarray) -> np.ndarray:
    # sample in a content-canonical direction so edge values are bit-exactly
    # independent of traversal order (graph edge caches and path evaluation
    # agree no matter which way a route crosses the edge); ts grids are
    # mirror-symmetric so the sampled positions cover the same set
    if tuple(b.to_array().ravel()) < tuple(a.to_array().ravel()):
        a, b = b, a
    poses = interpolate_batch(a, b, ts)
    return scene_kernels(scene).clearance(poses)


def _edge_segments(scene, path, refine: int):
    """Yield (a, b, edge_length, n_seg) per edge at the scene sampling step."""
    step = scene.clearance_sample_step
    for a, b in zip(path.nodes, path.nodes[1:]):
        lam = config_distance(a, b, scene.weights)
        n_seg = edge_sample_count(lam, step) * refine
        yield a, b, lam, n_seg


def integrated_k_inverse_clearance(scene, path, k: float, refine: int = 1) -> float:
    """Integral along the path of clamped clearance to the power -k.

    Per edge this is edge_length times the mean of clamp(Cl(midpoint))**-k
    over equal sub-segments, so k = 0 reproduces path_length exactly.
    """
    if k < 0:
        raise ValueError("k must be non-negative")
    floor = clearance_floor(scene)
    total = 0.0
    for a, b, lam, n_seg in _edge_segments(scene, path, refine):
        cl = _edge_clearances(scene, a, b, edge_midpoint_ts(n_seg))
        total += edge_kinv_term(lam, cl, k, floor)
    return total


def bottleneck_clearance(scene, path, refine: int = 1) -> float:
    """Minimum sampled clearance along the path; samples include every node."""
    worst = math.inf
    for a, b, _lam, n_seg in _edge_segments(scene, path, refine):
        cl = _edge_clearances(scene, a, b, edge_grid_ts(n_seg))
        worst = min(worst, float(cl.min()))
    return worst


def average_clearance(scene, path, refine: int = 1) -> float:
    """Arc-length-weighted mean clearance along the path (not optimizable)."""
    total = 0.0
    arc = 0.0
    for a, b, lam, n_seg in _edge_segments(scene, path, refine):
        if lam == 0.0:
            continue
        cl = _edge_clearances(scene, a, b, edge_midpoint_ts(n_seg))
        total += lam * float(np.mean(cl))
        arc += lam
    if arc == 0.0:
        # degenerate path that never moves: report the clearance where it sits
        return float(_edge_clearances(scene, path.nodes[0], path.nodes[0], np.array([0.0]))[0])
    return total / arc


def evaluate_measure(scene, path, m: QualityMeasure, refine: int = 1) -> float:
    if m.kind == "length":
        return path_length(path, scene.weights)
    if m.kind == "kinv":
        return integrated_k_inverse_clearance(scene, path, m.k, refine)
    if m.kind == "bottleneck":
        return bottleneck_clearance(scene, path, refine)
    return average_clearance(scene, path, refine)
