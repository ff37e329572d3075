"""Alignment of two node sequences by dynamic programming, and the bridge
candidates it induces.

Two paths through the same space tend to contain interchangeable stretches.
A global alignment with gaps (affine gap costs optional) pins down which
nodes correspond; matched pairs and gap flanks then become the candidate
connections worth offering to the local planner, at most 2(m+n) per pair of
paths instead of all m*n combinations.

An alignment is a list of ops: ("match", i, j) consumes p[i] and q[j],
("gap_p", i) consumes p[i] unmatched, ("gap_q", j) consumes q[j] unmatched.
Costs: a match costs delta_scale times the metric distance of the pair; every
gap op costs gap_ext, and each maximal run of same-direction gaps additionally
costs gap_init once.  Ties prefer match, then gap_p, then gap_q.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cspace import MetricWeights, config_distance

TRACE_NONE = -1
TRACE_DIAG = 0
TRACE_UP = 1
TRACE_LEFT = 2


@dataclass(frozen=True)
class MatchParams:
    # gap_ext None means: delta_scale * median consecutive-node distance over
    # both paths, resolved when match_paths runs (keeps matching scale-free).
    gap_ext: float | None = None
    gap_init: float = 0.0
    delta_scale: float = 1.0

    def __post_init__(self):
        if self.gap_ext is not None and self.gap_ext < 0:
            raise ValueError("gap_ext must be non-negative")
        if self.gap_init < 0:
            raise ValueError("gap_init must be non-negative")
        if self.delta_scale <= 0:
            raise ValueError("delta_scale must be positive")


@dataclass
class Alignment:
    ops: list[tuple]
    cost: float


@dataclass
class DpTables:
    """cost[i][j]: best cost aligning p[:i] with q[:j].  trace holds the move
    that achieved it (diag/up/left); for affine gaps it reports the best lane
    per cell while the returned Alignment follows the exact lane traceback."""

    cost: np.ndarray
    trace: np.ndarray
    gap_ext: float
    gap_init: float
    delta_scale: float


def _nodes(p) -> list:
    return list(p.nodes) if hasattr(p, "nodes") else list(p)


def resolve_gap_ext(p, q, params: MatchParams, weights: MetricWeights) -> float:
    if params.gap_ext is not None:
        return params.gap_ext
    pn, qn = _nodes(p), _nodes(q)
    gaps = [
        config_distance(a, b, weights)
        for seq in (pn, qn)
        for a, b in zip(seq, seq[1:])
    ]
    if not gaps:
        return 0.0
    return params.delta_scale * float(np.median(gaps))


def match_paths(p, q, params: MatchParams, weights: MetricWeights) -> tuple[DpTables, Alignment]:
    """Globally align two node sequences; returns the DP tables and the
    optimal alignment (deterministic tie-breaking)."""
    pn, qn = _nodes(p), _nodes(q)
    if not pn or not qn:
        raise ValueError("cannot match an empty node sequence")
    m, n = len(pn), len(qn)
    gap_ext = resolve_gap_ext(p, q, params, weights)
    gap_init = params.gap_init

    delta = np.empty((m, n))
    for i in range(m):
        for j in range(n):
            delta[i, j] = params.delta_scale * config_distance(pn[i], qn[j], weights)

    if gap_init == 0.0:
        return _match_simple(m, n, delta, gap_ext, params)
    return _match_affine(m, n, delta, gap_ext, gap_init, params)


def _match_simple(m, n, delta, gap_ext, params) -> tuple[DpTables, Alignment]:
    cost = np.empty((m + 1, n + 1))
    trace = np.full((m + 1, n + 1), TRACE_NONE, dtype=np.int8)
    cost[0, 0] = 0.0
    for i in range(1, m + 1):
        cost[i, 0] = cost[i - 1, 0] + gap_ext
        trace[i, 0] = TRACE_UP
    for j in range(1, n + 1):
        cost[0, j] = cost[0, j - 1] + gap_ext
        trace[0, j] = TRACE_LEFT
    for i in range(1, m + 1):
        for j in range(1, n + 1):
            best = cost[i - 1, j - 1] + delta[i - 1, j - 1]
            move = TRACE_DIAG
            up = cost[i - 1, j] + gap_ext
            if up < best:
                best, move = up, TRACE_UP
            left = cost[i, j - 1] + gap_ext
            if left < best:
                best, move = left, TRACE_LEFT
            cost[i, j] = best
            trace[i, j] = move

    ops: list[tuple] = []
    i, j = m, n
    while i > 0 or j > 0:
        move = trace[i, j]
        if move == TRACE_DIAG:
            ops.append(("match", i - 1, j - 1))
            i, j = i - 1, j - 1
        elif move == TRACE_UP:
            ops.append(("gap_p", i - 1))
            i -= 1
        else:
            ops.append(("gap_q", j - 1))
            j -= 1
    ops.reverse()
    tables = DpTables(cost, trace, gap_ext, 0.0, params.delta_scale)
    return tables, Alignment(ops, float(cost[m, n]))


def _match_affine(m, n, delta, gap_ext, gap_init, params) -> tuple[DpTables, Alignment]:
    inf = math.inf
    lane_m = np.full((m + 1, n + 1), inf)
    lane_u = np.full((m + 1, n + 1), inf)
    lane_l = np.full((m + 1, n + 1), inf)
    # predecessor lane per cell and lane: 0=M, 1=U, 2=L
    from_m = np.full((m + 1, n + 1), TRACE_NONE, dtype=np.int8)
    from_u = np.full((m + 1, n + 1), TRACE_NONE, dtype=np.int8)
    from_l = np.full((m + 1, n + 1), TRACE_NONE, dtype=np.int8)

    lane_m[0, 0] = 0.0
    for i in range(1, m + 1):
        prev = lane_m[i - 1, 0] + gap_init + gap_ext if i == 1 else lane_u[i - 1, 0] + gap_ext
        lane_u[i, 0] = prev
        from_u[i, 0] = 0 if i == 1 else 1
    for j in range(1, n + 1):
        prev = lane_m[0, j - 1] + gap_init + gap_ext if j == 1 else lane_l[0, j - 1] + gap_ext
        lane_l[0, j] = prev
        from_l[0, j] = 0 if j == 1 else 2

    for i in range(1, m + 1):
        for j in range(1, n + 1):
            # match lane: any predecessor lane, preference M < U < L on ties
            best, src = lane_m[i - 1, j - 1], 0
            if lane_u[i - 1, j - 1] < best:
                best, src = lane_u[i - 1, j - 1], 1
            if lane_l[i - 1, j - 1] < best:
                best, src = lane_l[i - 1, j - 1], 2
            lane_m[i, j] = best + delta[i - 1, j - 1]
            from_m[i, j] = src
            # gap in p (up): opening from M or L pays gap_init again
            best, src = lane_m[i - 1, j] + gap_init + gap_ext, 0
            cand = lane_u[i - 1, j] + gap_ext
            if cand < best:
                best, src = cand, 1
            cand = lane_l[i - 1, j] + gap_init + gap_ext
            if cand < best:
                best, src = cand, 2
            lane_u[i, j] = best
            from_u[i, j] = src
            # gap in q (left)
            best, src = lane_m[i, j - 1] + gap_init + gap_ext, 0
            cand = lane_u[i, j - 1] + gap_init + gap_ext
            if cand < best:
                best, src = cand, 1
            cand = lane_l[i, j - 1] + gap_ext
            if cand < best:
                best, src = cand, 2
            lane_l[i, j] = best
            from_l[i, j] = src

    stacked = np.stack([lane_m, lane_u, lane_l])
    cost = stacked.min(axis=0)
    trace = stacked.argmin(axis=0).astype(np.int8)  # argmin prefers lower index on ties
    trace[0, 0] = TRACE_NONE

    lane = 0
    best = lane_m[m, n]
    if lane_u[m, n] < best:
        best, lane = lane_u[m, n], 1
    if lane_l[m, n] < best:
        best, lane = lane_l[m, n], 2
    total = best

    ops: list[tuple] = []
    i, j = m, n
    while i > 0 or j > 0:
        if lane == 0:
            ops.append(("match", i - 1, j - 1))
            lane = int(from_m[i, j])
            i, j = i - 1, j - 1
        elif lane == 1:
            ops.append(("gap_p", i - 1))
            lane = int(from_u[i, j])
            i -= 1
        else:
            ops.append(("gap_q", j - 1))
            lane = int(from_l[i, j])
            j -= 1
    ops.reverse()
    tables = DpTables(cost, trace, gap_ext, gap_init, params.delta_scale)
    return tables, Alignment(ops, float(total))


def alignment_is_valid(m: int, n: int, ops: list[tuple]) -> bool:
    """Structural check: ops consume p[0..m) and q[0..n) in order, covering both."""
    pi = qi = 0
    for op in ops:
        if op[0] == "match":
            if op[1] != pi or op[2] != qi:
                return False
            pi += 1
            qi += 1
        elif op[0] == "gap_p":
            if op[1] != pi:
                return False
            pi += 1
        elif op[0] == "gap_q":
            if op[1] != qi:
                return False
            qi += 1
        else:
            return False
    return pi == m and qi == n


def decode_trace(tables: DpTables) -> list[tuple]:
    """Walk the trace matrix greedily from the far corner; always yields a
    structurally valid alignment."""
    i, j = tables.cost.shape[0] - 1, tables.cost.shape[1] - 1
    ops: list[tuple] = []
    while i > 0 or j > 0:
        move = tables.trace[i, j]
        if move == TRACE_DIAG and i > 0 and j > 0:
            ops.append(("match", i - 1, j - 1))
            i, j = i - 1, j - 1
        elif (move == TRACE_UP and i > 0) or j == 0:
            ops.append(("gap_p", i - 1))
            i -= 1
        else:
            ops.append(("gap_q", j - 1))
            j -= 1
    ops.reverse()
    return ops


def alignment_cost(p, q, ops: list[tuple], gap_ext: float, gap_init: float,
                   delta_scale: float, weights: MetricWeights) -> float:
    """Sequential recomputation of an alignment's cost from its ops."""
    pn, qn = _nodes(p), _nodes(q)
    total = 0.0
    prev_kind = None
    for op in ops:
        if op[0] == "match":
            total += delta_scale * config_distance(pn[op[1]], qn[op[2]], weights)
        else:
            if op[0] != prev_kind:
                total += gap_init
            total += gap_ext
        prev_kind = op[0]
    return total


def bridge_candidates(p, q, alignment: Alignment) -> list[tuple[int, int]]:
    """Candidate connections (i, j) between p-node i and q-node j.

    Every matched pair is a candidate.  Each maximal gap run contributes, for
    every node it skips, the matched nodes of the other path flanking the run
    (only the existing flank at alignment ends).  Deduplicated and sorted;
    never more than 2(m+n) pairs.
    """
    ops = alignment.ops
    pairs: set[tuple[int, int]] = set()

    # matched node of the other path nearest before/after each op position
    last_match = [None] * len(ops)
    prev = None
    for k, op in enumerate(ops):
        last_match[k] = prev
        if op[0] == "match":
            prev = op
    next_match = [None] * len(ops)
    nxt = None
    for k in range(len(ops) - 1, -1, -1):
        next_match[k] = nxt
        if ops[k][0] == "match":
            nxt = ops[k]

    for k, op in enumerate(ops):
        if op[0] == "match":
            pairs.add((op[1], op[2]))
        elif op[0] == "gap_p":
            for flank in (last_match[k], next_match[k]):
                if flank is not None:
                    pairs.add((op[1], flank[2]))
        else:  # gap_q
            for flank in (last_match[k], next_match[k]):
                if flank is not None:
                    pairs.add((flank[1], op[1]))
    return sorted(pairs)
