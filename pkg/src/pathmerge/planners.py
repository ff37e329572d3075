"""Sampling-based planners: PRM with selectable cycle policy, RRT, shortcutting.

Every planner is deterministic given its seed.  Failures are returned as
values carrying diagnostics, never raised.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Union

import numpy as np

from ._search import roadmap_distance, shortest_path
from .cspace import (
    Config,
    config_distance,
    interpolate,
    is_free,
    local_plan,
    sample_uniform,
)


@dataclass
class Path:
    """Ordered configurations; consecutive pairs are local-planner valid."""

    nodes: list[Config]

    def __post_init__(self):
        if len(self.nodes) < 2:
            raise ValueError("a path needs at least 2 nodes")
        nb = len(self.nodes[0].poses)
        if any(len(c.poses) != nb for c in self.nodes):
            raise ValueError("all path nodes must have the same body count")

    def __len__(self) -> int:
        return len(self.nodes)

    def __iter__(self):
        return iter(self.nodes)


@dataclass(frozen=True)
class NoCycles:
    """Admit an edge only when it merges two roadmap components."""


@dataclass(frozen=True)
class AllCycles:
    """Admit every collision-free edge."""


@dataclass(frozen=True)
class UsefulCycles:
    """Admit a cycle-closing edge only if it shortens the roadmap route between
    its endpoints by more than a factor gamma."""

    gamma: float = 3.0


CycleMode = Union[NoCycles, AllCycles, UsefulCycles]


@dataclass(frozen=True)
class PrmParams:
    n_samples: int = 500
    k_neighbors: int = 15
    cycle_mode: CycleMode = NoCycles()
    time_budget_s: float | None = None
    seed: int = 0
    # Optional hard cap on local-planner invocations; lets two pipelines be
    # compared at an equal dominant-cost budget deterministically.
    max_local_plan_calls: int | None = None


@dataclass(frozen=True)
class RrtParams:
    step: float
    goal_bias: float = 0.05
    max_iters: int = 5000
    seed: int = 0


@dataclass
class PlanFailure:
    reason: str
    components: int | None = None
    closest_gap: float | None = None
    local_plan_calls: int = 0

    def __str__(self):
        parts = [self.reason]
        if self.components is not None:
            parts.append(f"roadmap components: {self.components}")
        if self.closest_gap is not None and math.isfinite(self.closest_gap):
            parts.append(f"nearest approach between query components: {self.closest_gap:.6g}")
        return "; ".join(parts)


class _UnionFind:
    def __init__(self):
        self.parent: list[int] = []

    def add(self) -> int:
        self.parent.append(len(self.parent))
        return len(self.parent) - 1

    def find(self, i: int) -> int:
        root = i
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[i] != root:
            self.parent[i], i = root, self.parent[i]
        return root

    def union(self, a: int, b: int):
        self.parent[self.find(a)] = self.find(b)


def _batch_distances(arr: np.ndarray, q: np.ndarray, w_trans: float, w_rot: float) -> np.ndarray:
    """Metric distances from configs arr (M, nb, 3) to config q (nb, 3)."""
    dxy = arr[:, :, :2] - q[None, :, :2]
    d2 = w_trans * (dxy * dxy).sum(axis=2)
    dth = np.abs(arr[:, :, 2] - q[None, :, 2])
    dth = np.minimum(dth, 2.0 * math.pi - dth)
    d2 = d2 + w_rot * dth * dth
    return np.sqrt(d2.sum(axis=1))


def _sample_free(scene, rng, max_attempts: int = 20000) -> Config | None:
    for _ in range(max_attempts):
        c = sample_uniform(scene, rng)
        if is_free(scene, c):
            return c
    return None


def prm_plan(scene, params: PrmParams, stats: dict | None = None):
    """Probabilistic roadmap; returns the Dijkstra-shortest roadmap path by
    metric length, or a PlanFailure with connectivity diagnostics."""
    t0 = time.monotonic()
    rng = np.random.default_rng(params.seed)
    w = scene.weights
    eps = scene.eps_res
    calls = 0

    start, goal = scene.start, scene.goal
    if config_distance(start, goal, w) == 0.0:
        if stats is not None:
            stats.update(local_plan_calls=0, nodes=2, edges=0, wall_time_s=0.0)
        return Path([start, goal])

    nb = len(start.poses)
    cap = params.n_samples + 2
    arr = np.empty((cap, nb, 3))
    configs: list[Config] = []
    uf = _UnionFind()
    adj: dict[int, list[tuple[int, float]]] = {}

    def add_node(c: Config) -> int:
        i = uf.add()
        configs.append(c)
        arr[i] = c.to_array()
        adj[i] = []
        return i

    def add_edge(u: int, v: int, length: float):
        adj[u].append((v, length))
        adj[v].append((u, length))
        uf.union(u, v)

    add_node(start)
    add_node(goal)

    def budget_left() -> bool:
        if params.time_budget_s is not None and time.monotonic() - t0 > params.time_budget_s:
            return False
        if params.max_local_plan_calls is not None and calls >= params.max_local_plan_calls:
            return False
        return True

    mode = params.cycle_mode
    for _ in range(params.n_samples):
        if not budget_left():
            break
        c = _sample_free(scene, rng)
        if c is None:
            break
        new = add_node(c)
        n = len(configs)
        dists = _batch_distances(arr[: n - 1], arr[new], w.w_trans, w.w_rot)
        order = np.lexsort((np.arange(n - 1), dists))[: params.k_neighbors]
        for nbr in order:
            nbr = int(nbr)
            length = float(config_distance(configs[new], configs[nbr], w))
            same = uf.find(new) == uf.find(nbr)
            if isinstance(mode, NoCycles):
                if same:
                    continue
            elif isinstance(mode, UsefulCycles):
                if same:
                    d_route = roadmap_distance(adj, new, nbr, cutoff=mode.gamma * length)
                    if not d_route > mode.gamma * length:
                        continue
            calls += 1
            if local_plan(scene, configs[new], configs[nbr], eps):
                add_edge(new, nbr, length)

    result = shortest_path(adj, 0, 1)
    wall = time.monotonic() - t0
    if stats is not None:
        nedges = sum(len(v) for v in adj.values()) // 2
        stats.update(
            local_plan_calls=calls, nodes=len(configs), edges=nedges, wall_time_s=wall
        )
    if result is None:
        roots = {uf.find(i) for i in range(len(configs))}
        start_ids = [i for i in range(len(configs)) if uf.find(i) == uf.find(0)]
        goal_ids = [i for i in range(len(configs)) if uf.find(i) == uf.find(1)]
        gap = math.inf
        for i in start_ids:
            d = _batch_distances(arr[goal_ids], arr[i], w.w_trans, w.w_rot).min()
            gap = min(gap, float(d))
        return PlanFailure(
            reason="prm: start and goal ended up in different roadmap components",
            components=len(roots),
            closest_gap=gap,
            local_plan_calls=calls,
        )
    _, chain = result
    return Path([configs[i] for i in chain])


def rrt_plan(scene, params: RrtParams, stats: dict | None = None):
    """Rapidly-exploring random tree with goal biasing."""
    if not 0.0 <= params.goal_bias <= 1.0:
        raise ValueError("goal_bias must lie in [0, 1]")
    if params.step <= 0:
        raise ValueError("step must be positive")
    t0 = time.monotonic()
    rng = np.random.default_rng(params.seed)
    w = scene.weights
    eps = scene.eps_res
    calls = 0

    start, goal = scene.start, scene.goal
    nb = len(start.poses)
    arr = np.empty((params.max_iters + 1, nb, 3))
    configs: list[Config] = [start]
    parent: list[int] = [-1]
    arr[0] = start.to_array()

    def chain(i: int) -> list[Config]:
        out = []
        while i != -1:
            out.append(configs[i])
            i = parent[i]
        out.reverse()
        return out

    def finish(nodes: list[Config]):
        if stats is not None:
            stats.update(
                local_plan_calls=calls,
                nodes=len(configs),
                wall_time_s=time.monotonic() - t0,
            )
        if len(nodes) == 1:
            nodes = nodes + [nodes[0]]
        return Path(nodes)

    if config_distance(start, goal, w) == 0.0:
        return finish([start])

    for _ in range(params.max_iters):
        if rng.uniform() < params.goal_bias:
            target = goal
        else:
            target = sample_uniform(scene, rng)
        tarr = target.to_array()
        n = len(configs)
        dists = _batch_distances(arr[:n], tarr, w.w_trans, w.w_rot)
        near = int(np.argmin(dists))
        d = float(dists[near])
        if d == 0.0:
            continue
        if d <= params.step:
            new = target
        else:
            new = interpolate(configs[near], target, params.step / d)
        if not is_free(scene, new):
            continue
        calls += 1
        if not local_plan(scene, configs[near], new, eps):
            continue
        configs.append(new)
        parent.append(near)
        arr[len(configs) - 1] = new.to_array()
        d_goal = config_distance(new, goal, w)
        if d_goal == 0.0:
            return finish(chain(len(configs) - 1))
        if d_goal <= params.step:
            calls += 1
            if local_plan(scene, new, goal, eps):
                return finish(chain(len(configs) - 1) + [goal])

    if stats is not None:
        stats.update(
            local_plan_calls=calls, nodes=len(configs), wall_time_s=time.monotonic() - t0
        )
    return PlanFailure(
        reason="rrt: max_iters exhausted without reaching the goal",
        local_plan_calls=calls,
    )


def shortcut(scene, path: Path, iters: int, seed: int = 0) -> Path:
    """Random-pair shortcutting; never increases metric length.

    Each iteration picks two nodes and, if the straight segment between them
    validates, splices out everything in between.
    """
    if iters < 0:
        raise ValueError("iters must be non-negative")
    nodes = list(path.nodes)
    rng = np.random.default_rng(seed)
    eps = scene.eps_res
    for _ in range(iters):
        n = len(nodes)
        if n < 3:
            continue
        i = int(rng.integers(0, n))
        j = int(rng.integers(0, n))
        if i > j:
            i, j = j, i
        if j - i < 2:
            continue
        if local_plan(scene, nodes[i], nodes[j], eps):
            nodes = nodes[: i + 1] + nodes[j:]
    return Path(nodes)


def validate_path(scene, path: Path) -> bool:
    """Post-hoc check: all nodes free and every edge local-planner valid."""
    if not all(is_free(scene, c) for c in path.nodes):
        return False
    return all(
        local_plan(scene, a, b, scene.eps_res)
        for a, b in zip(path.nodes, path.nodes[1:])
    )
