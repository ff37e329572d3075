"""Hybridization graph: merge several solution paths into one graph, bridge
them with extra validated edges, and extract the best route under a chosen
quality measure.

The graph always contains every input path as a subgraph (start and goal are
shared nodes; interior nodes stay distinct even when coincident), so the
extracted path is never worse than the best input.  Variants differ only in
which node pairs are offered to the local planner as bridge candidates:

- all-pairs: every distinct node pair not already connected
- neighborhood: all-pairs filtered to metric distance <= radius
- edit-distance: pairs suggested by aligning each pair of paths
- edit-distance + neighborhood: the aligned pairs, distance-filtered

Candidate validation calls are independent, so they could run in parallel;
this build commits them in deterministic candidate order either way, so the
resulting graph never depends on scheduling.

Per-edge clearance profiles are cached at build time (sampled at the scene's
clearance_sample_step), so switching the extraction measure never reruns
collision checks.  Cached edge weights reuse the same helpers as standalone
path evaluation, which keeps graph costs and evaluate_measure in exact
agreement.
"""

from __future__ import annotations

import heapq
import time
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .cspace import Config, config_distance, local_plan
from .pathmatch import MatchParams, bridge_candidates, match_paths
from .planners import Path
from .quality import (
    QualityMeasure,
    clearance_floor,
    edge_grid_ts,
    edge_kinv_term,
    edge_midpoint_ts,
    edge_sample_count,
    _edge_clearances,
)

START_ID = 0
GOAL_ID = 1

# bridge radius default, as a fraction of the scene diameter
DEFAULT_RADIUS_FRACTION = 0.15

SHARED_ENDPOINT_TOL = 1e-9


@dataclass(frozen=True)
class AllPairs:
    pass


@dataclass(frozen=True)
class Neighborhood:
    radius: float | None = None  # None: DEFAULT_RADIUS_FRACTION * scene diameter

    def __post_init__(self):
        if self.radius is not None and self.radius <= 0:
            raise ValueError("radius must be positive")


@dataclass(frozen=True)
class EditDistance:
    match: MatchParams = field(default_factory=MatchParams)


@dataclass(frozen=True)
class EditDistanceNeighborhood:
    match: MatchParams = field(default_factory=MatchParams)
    radius: float | None = None

    def __post_init__(self):
        if self.radius is not None and self.radius <= 0:
            raise ValueError("radius must be positive")


HGraphVariant = Union[AllPairs, Neighborhood, EditDistance, EditDistanceNeighborhood]


@dataclass
class EdgeGeometry:
    """Cached geometry of one validated edge.

    clearance_samples is an (n, 2) array of (arc_offset, clearance) rows at
    the scene's sampling step, covering both endpoints; mid_clearances are
    the clearances at sub-segment midpoints, cached for additive
    inverse-clearance weights.
    """

    length: float
    clearance_samples: np.ndarray
    min_clearance: float
    mid_clearances: np.ndarray


@dataclass
class VariantMeta:
    name: str
    radius: float | None
    candidates: int
    local_plan_calls: int


@dataclass(eq=False)
class HGraph:
    """Node 0 is the shared start, node 1 the shared goal; interior nodes are
    listed per input path in order.  input_node_ids[i] is path i spelled as a
    node id sequence."""

    nodes: list[Config]
    provenance: list[tuple]
    edges: list[tuple[int, int, EdgeGeometry]]
    input_node_ids: list[list[int]]
    clearance_floor: float
    variant_meta: VariantMeta


def variant_name(variant: HGraphVariant) -> str:
    if isinstance(variant, AllPairs):
        return "all-pairs"
    if isinstance(variant, Neighborhood):
        return "neighborhood"
    if isinstance(variant, EditDistance):
        return "edit"
    return "edit-neighborhood"


def _edge_geometry(scene, a: Config, b: Config) -> EdgeGeometry:
    lam = config_distance(a, b, scene.weights)
    n_seg = edge_sample_count(lam, scene.clearance_sample_step)
    grid_ts = edge_grid_ts(n_seg)
    grid = _edge_clearances(scene, a, b, grid_ts)
    mids = _edge_clearances(scene, a, b, edge_midpoint_ts(n_seg))
    samples = np.column_stack((grid_ts * lam, grid))
    return EdgeGeometry(lam, samples, float(grid.min()), mids)


def _shared_endpoints(paths: list[Path]) -> tuple[Config, Config]:
    start = paths[0].nodes[0]
    goal = paths[0].nodes[-1]
    ref_s, ref_g = start.to_array(), goal.to_array()
    for p in paths[1:]:
        if p.nodes[0].to_array().shape != ref_s.shape:
            raise ValueError("input paths must have the same number of bodies")
        if (np.abs(p.nodes[0].to_array() - ref_s) > SHARED_ENDPOINT_TOL).any() or (
            np.abs(p.nodes[-1].to_array() - ref_g) > SHARED_ENDPOINT_TOL
        ).any():
            raise ValueError("input paths must share start and goal configurations")
    return start, goal


def build_hgraph(scene, paths: list[Path], variant: HGraphVariant,
                 stats: dict | None = None) -> HGraph:
    """Merge paths into a graph and bridge them per the chosen variant.

    Exactly one local_plan call is spent per candidate pair; the count is
    recorded in variant_meta.  Candidates are processed in sorted node-id
    order (ids follow input path order), so builds are deterministic.
    """
    if not paths:
        raise ValueError("at least one input path is required")
    t0 = time.perf_counter()
    start, goal = _shared_endpoints(paths)

    nodes: list[Config] = [start, goal]
    provenance: list[tuple] = [("start",), ("goal",)]
    input_node_ids: list[list[int]] = []
    for pid, p in enumerate(paths):
        ids = [START_ID]
        for idx in range(1, len(p.nodes) - 1):
            ids.append(len(nodes))
            nodes.append(p.nodes[idx])
            provenance.append(("path", pid, idx))
        ids.append(GOAL_ID)
        input_node_ids.append(ids)

    edge_map: dict[tuple[int, int], EdgeGeometry] = {}
    for ids in input_node_ids:
        for u, v in zip(ids, ids[1:]):
            key = (u, v) if u < v else (v, u)
            if key not in edge_map:
                edge_map[key] = _edge_geometry(scene, nodes[key[0]], nodes[key[1]])

    candidates = _candidate_pairs(scene, nodes, input_node_ids, paths, variant,
                                  set(edge_map))

    calls = 0
    for u, v in candidates:
        calls += 1
        if local_plan(scene, nodes[u], nodes[v], scene.eps_res):
            edge_map[(u, v)] = _edge_geometry(scene, nodes[u], nodes[v])

    radius = _resolved_radius(scene, variant)
    meta = VariantMeta(variant_name(variant), radius, len(candidates), calls)
    edges = [(u, v, geom) for (u, v), geom in sorted(edge_map.items())]
    graph = HGraph(nodes, provenance, edges, input_node_ids,
                   clearance_floor(scene), meta)
    if stats is not None:
        stats["nodes"] = len(nodes)
        stats["edges"] = len(edges)
        stats["candidates"] = len(candidates)
        stats["local_plan_calls"] = calls
        stats["build_time_s"] = time.perf_counter() - t0
    return graph


def _resolved_radius(scene, variant: HGraphVariant) -> float | None:
    if isinstance(variant, (Neighborhood, EditDistanceNeighborhood)):
        return variant.radius if variant.radius is not None else (
            DEFAULT_RADIUS_FRACTION * scene.diameter
        )
    return None


def _candidate_pairs(scene, nodes, input_node_ids, paths, variant,
                     existing: set[tuple[int, int]]) -> list[tuple[int, int]]:
    radius = _resolved_radius(scene, variant)

    if isinstance(variant, (AllPairs, Neighborhood)):
        pairs = []
        for u in range(len(nodes)):
            for v in range(u + 1, len(nodes)):
                if (u, v) in existing:
                    continue
                if radius is not None and config_distance(
                        nodes[u], nodes[v], scene.weights) > radius:
                    continue
                pairs.append((u, v))
        return pairs

    match_params = variant.match
    found: set[tuple[int, int]] = set()
    for pa in range(len(paths)):
        for pb in range(pa + 1, len(paths)):
            _, alignment = match_paths(paths[pa], paths[pb], match_params,
                                       scene.weights)
            for i, j in bridge_candidates(paths[pa], paths[pb], alignment):
                u, v = input_node_ids[pa][i], input_node_ids[pb][j]
                if u == v:
                    continue
                key = (u, v) if u < v else (v, u)
                if key in existing:
                    continue
                if radius is not None and config_distance(
                        nodes[key[0]], nodes[key[1]], scene.weights) > radius:
                    continue
                found.add(key)
    return sorted(found)


def _adjacency(h: HGraph) -> dict[int, list[tuple[int, EdgeGeometry]]]:
    adj: dict[int, list[tuple[int, EdgeGeometry]]] = {i: [] for i in range(len(h.nodes))}
    for u, v, geom in h.edges:
        adj[u].append((v, geom))
        adj[v].append((u, geom))
    return adj


def _additive_weight(geom: EdgeGeometry, measure: QualityMeasure,
                     floor: float) -> float:
    if measure.kind == "length":
        return geom.length
    return edge_kinv_term(geom.length, geom.mid_clearances, measure.k, floor)


def extract_best_node_ids(h: HGraph, measure: QualityMeasure) -> tuple[list[int], float]:
    """Best start-goal route and its in-graph value.

    Additive measures run Dijkstra over cached edge weights; bottleneck runs
    its maximin variant.  Ties break by fewer edges, then lexicographic node
    ids, making extraction a total order (matches exhaustive enumeration).
    """
    if measure.kind == "avg-clearance":
        raise ValueError("avg-clearance is evaluation-only, not an extraction objective")
    adj = _adjacency(h)
    if measure.kind == "bottleneck":
        # First-settle maximin can return a tie with more edges than needed,
        # so solve in two phases: optimal value, then fewest-edges/lex route
        # over the subgraph of edges at or above it (every goal route there
        # scores exactly the optimum).
        best = _maximin_value(adj)
        chain = _fewest_edges_chain(adj, lambda geom: geom.min_clearance >= best)
        return chain, best

    # label: (cost, edge_count, node tuple); cost grows monotonically along
    # any extension, so first settle per node is optimal
    heap: list[tuple[float, int, tuple[int, ...]]] = [(0.0, 0, (START_ID,))]
    settled: set[int] = set()
    while heap:
        cost, n_edges, chain_t = heapq.heappop(heap)
        node = chain_t[-1]
        if node in settled:
            continue
        settled.add(node)
        if node == GOAL_ID:
            return list(chain_t), cost
        for nb, geom in adj[node]:
            if nb in settled:
                continue
            nxt = cost + _additive_weight(geom, measure, h.clearance_floor)
            heapq.heappush(heap, (nxt, n_edges + 1, chain_t + (nb,)))
    raise ValueError("start and goal are not connected in the graph")


def _maximin_value(adj) -> float:
    """Largest achievable minimum edge clearance from start to goal."""
    heap: list[tuple[float, int]] = [(-float("inf"), START_ID)]
    settled: set[int] = set()
    while heap:
        primary, node = heapq.heappop(heap)
        if node in settled:
            continue
        settled.add(node)
        if node == GOAL_ID:
            return -primary
        for nb, geom in adj[node]:
            if nb not in settled:
                heapq.heappush(heap, (max(primary, -geom.min_clearance), nb))
    raise ValueError("start and goal are not connected in the graph")


def _fewest_edges_chain(adj, keep) -> list[int]:
    """Fewest-edges route over edges passing `keep`, lexicographic on ties."""
    heap: list[tuple[int, tuple[int, ...]]] = [(0, (START_ID,))]
    settled: set[int] = set()
    while heap:
        n_edges, chain = heapq.heappop(heap)
        node = chain[-1]
        if node in settled:
            continue
        settled.add(node)
        if node == GOAL_ID:
            return list(chain)
        for nb, geom in adj[node]:
            if nb not in settled and keep(geom):
                heapq.heappush(heap, (n_edges + 1, chain + (nb,)))
    raise ValueError("start and goal are not connected in the graph")


def extract_best_path(h: HGraph, measure: QualityMeasure) -> Path:
    ids, _ = extract_best_node_ids(h, measure)
    return Path([h.nodes[i] for i in ids])


def graph_path_value(h: HGraph, node_ids: list[int], measure: QualityMeasure) -> float:
    """Value of a concrete route through the graph, from cached edge data,
    accumulated in path order (matches Dijkstra's arithmetic exactly)."""
    geoms = {}
    for u, v, geom in h.edges:
        geoms[(u, v)] = geom
        geoms[(v, u)] = geom
    if measure.kind == "bottleneck":
        worst = float("inf")
        for u, v in zip(node_ids, node_ids[1:]):
            worst = min(worst, geoms[(u, v)].min_clearance)
        return worst
    if measure.kind == "avg-clearance":
        raise ValueError("avg-clearance is evaluation-only, not a graph objective")
    total = 0.0
    for u, v in zip(node_ids, node_ids[1:]):
        total += _additive_weight(geoms[(u, v)], measure, h.clearance_floor)
    return total


def hgraph_to_doc(h: HGraph) -> dict:
    """JSON-ready dump for debugging and rendering."""
    nodes = []
    for i, (cfg, prov) in enumerate(zip(h.nodes, h.provenance)):
        if prov[0] == "path":
            p: object = {"path": prov[1], "index": prov[2]}
        else:
            p = prov[0]
        nodes.append({"id": i, "provenance": p,
                      "config": [list(pose) for pose in cfg.to_array().tolist()]})
    edges = [{"u": u, "v": v, "length": geom.length,
              "min_clearance": geom.min_clearance} for u, v, geom in h.edges]
    return {
        "nodes": nodes,
        "edges": edges,
        "variant": h.variant_meta.name,
        "radius": h.variant_meta.radius,
        "candidates": h.variant_meta.candidates,
        "local_plan_calls": h.variant_meta.local_plan_calls,
    }
