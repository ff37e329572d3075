"""Deterministic Dijkstra helpers shared by the planners and the merge graph."""

from __future__ import annotations

import heapq
import math


def shortest_path(
    adj: dict[int, list[tuple[int, float]]], src: int, dst: int
) -> tuple[float, list[int]] | None:
    """Shortest additive-cost path; None if dst is unreachable.

    Deterministic: heap ties resolve by node id, relaxations only on strict
    improvement.
    """
    dist = {src: 0.0}
    prev: dict[int, int] = {}
    done: set[int] = set()
    heap: list[tuple[float, int]] = [(0.0, src)]
    while heap:
        d, u = heapq.heappop(heap)
        if u in done:
            continue
        done.add(u)
        if u == dst:
            node, chain = dst, [dst]
            while node != src:
                node = prev[node]
                chain.append(node)
            chain.reverse()
            return d, chain
        for v, w in adj.get(u, ()):
            nd = d + w
            if v not in dist or nd < dist[v]:
                dist[v] = nd
                prev[v] = u
                heapq.heappush(heap, (nd, v))
    return None


def roadmap_distance(
    adj: dict[int, list[tuple[int, float]]],
    src: int,
    dst: int,
    cutoff: float = math.inf,
) -> float:
    """Shortest-path cost src -> dst, or inf if unreachable or above cutoff."""
    if src == dst:
        return 0.0
    dist = {src: 0.0}
    done: set[int] = set()
    heap: list[tuple[float, int]] = [(0.0, src)]
    while heap:
        d, u = heapq.heappop(heap)
        if u in done:
            continue
        if d > cutoff:
            return math.inf
        done.add(u)
        if u == dst:
            return d
        for v, w in adj.get(u, ()):
            nd = d + w
            if v not in dist or nd < dist[v]:
                dist[v] = nd
                heapq.heappush(heap, (nd, v))
    return math.inf
