"""Planar polygon geometry: placement, intersection, minimum distance, clearance.

Polygons are simple, counter-clockwise, and carry a convex decomposition so the
intersection and distance kernels only ever deal with convex pieces.  Obstacles
and robot bodies are treated as closed sets: touching boundaries count as a
collision, which keeps the collision predicate conservative.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

import numpy as np

# Absolute tolerance for distance comparisons and degeneracy checks.
TOL = 1e-9

TWO_PI = 2.0 * math.pi


class Point2(NamedTuple):
    x: float
    y: float


@dataclass(frozen=True)
class Pose2:
    """Rigid placement in the plane.  theta is normalized to [0, 2*pi)."""

    x: float
    y: float
    theta: float

    def __post_init__(self):
        th = self.theta % TWO_PI
        object.__setattr__(self, "theta", th)


def wrap_angle(theta: float) -> float:
    """Normalize an angle to [0, 2*pi)."""
    return theta % TWO_PI


def signed_angle_diff(a: float, b: float) -> float:
    """Shortest signed rotation taking angle a to angle b, in (-pi, pi].

    A difference of exactly pi resolves to +pi (positive direction).
    """
    d = (b - a) % TWO_PI
    if d > math.pi:
        d -= TWO_PI
    return d


def _cross(ox, oy, ax, ay, bx, by) -> float:
    return (ax - ox) * (by - oy) - (ay - oy) * (bx - ox)


def signed_area(vertices: np.ndarray) -> float:
    """Shoelace area; positive for counter-clockwise order."""
    v = np.asarray(vertices, dtype=float)
    x, y = v[:, 0], v[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def _on_segment(px, py, qx, qy, rx, ry) -> bool:
    return (
        min(px, rx) - TOL <= qx <= max(px, rx) + TOL
        and min(py, ry) - TOL <= qy <= max(py, ry) + TOL
    )


def _segments_touch(p1, p2, p3, p4) -> bool:
    """True if closed segments p1p2 and p3p4 share any point."""
    d1 = _cross(p3[0], p3[1], p4[0], p4[1], p1[0], p1[1])
    d2 = _cross(p3[0], p3[1], p4[0], p4[1], p2[0], p2[1])
    d3 = _cross(p1[0], p1[1], p2[0], p2[1], p3[0], p3[1])
    d4 = _cross(p1[0], p1[1], p2[0], p2[1], p4[0], p4[1])
    if ((d1 > 0) != (d2 > 0)) and ((d3 > 0) != (d4 > 0)) and d1 != 0 and d2 != 0 and d3 != 0 and d4 != 0:
        return True
    if d1 == 0 and _on_segment(p3[0], p3[1], p1[0], p1[1], p4[0], p4[1]):
        return True
    if d2 == 0 and _on_segment(p3[0], p3[1], p2[0], p2[1], p4[0], p4[1]):
        return True
    if d3 == 0 and _on_segment(p1[0], p1[1], p3[0], p3[1], p2[0], p2[1]):
        return True
    if d4 == 0 and _on_segment(p1[0], p1[1], p4[0], p4[1], p2[0], p2[1]):
        return True
    return False


def _is_simple(verts: np.ndarray) -> bool:
    n = len(verts)
    for i in range(n):
        a1, a2 = verts[i], verts[(i + 1) % n]
        for j in range(i + 1, n):
            # skip adjacent edges (they legitimately share a vertex)
            if j == i or (j + 1) % n == i or (i + 1) % n == j:
                continue
            b1, b2 = verts[j], verts[(j + 1) % n]
            if _segments_touch(a1, a2, b1, b2):
                return False
    return True


def _is_convex(verts: np.ndarray) -> bool:
    n = len(verts)
    for i in range(n):
        o = verts[i]
        a = verts[(i + 1) % n]
        b = verts[(i + 2) % n]
        if _cross(o[0], o[1], a[0], a[1], b[0], b[1]) < -TOL:
            return False
    return True


def _point_in_triangle(p, a, b, c) -> bool:
    # CCW triangle; boundary counts as inside.
    d1 = _cross(a[0], a[1], b[0], b[1], p[0], p[1])
    d2 = _cross(b[0], b[1], c[0], c[1], p[0], p[1])
    d3 = _cross(c[0], c[1], a[0], a[1], p[0], p[1])
    return d1 >= -TOL and d2 >= -TOL and d3 >= -TOL


def ear_clip(vertices: np.ndarray) -> list[tuple[int, ...]]:
    """Triangulate a simple CCW polygon, returning vertex-index triples."""
    verts = np.asarray(vertices, dtype=float)
    idx = list(range(len(verts)))
    tris: list[tuple[int, ...]] = []
    while len(idx) > 3:
        clipped = False
        for k in range(len(idx)):
            i_prev = idx[k - 1]
            i_cur = idx[k]
            i_next = idx[(k + 1) % len(idx)]
            a, b, c = verts[i_prev], verts[i_cur], verts[i_next]
            if _cross(a[0], a[1], b[0], b[1], c[0], c[1]) <= TOL:
                continue  # reflex or collinear corner, not an ear
            others = (verts[m] for m in idx if m not in (i_prev, i_cur, i_next))
            if any(_point_in_triangle(p, a, b, c) for p in others):
                continue
            tris.append((i_prev, i_cur, i_next))
            idx.pop(k)
            clipped = True
            break
        if not clipped:
            # Only collinear corners remain convex; clip one degenerate ear.
            for k in range(len(idx)):
                i_prev, i_cur, i_next = idx[k - 1], idx[k], idx[(k + 1) % len(idx)]
                a, b, c = verts[i_prev], verts[i_cur], verts[i_next]
                if abs(_cross(a[0], a[1], b[0], b[1], c[0], c[1])) <= TOL:
                    tris.append((i_prev, i_cur, i_next))
                    idx.pop(k)
                    clipped = True
                    break
            if not clipped:
                raise ValueError("polygon decomposition failed: no ear found")
    tris.append(tuple(idx))
    return tris


class Polygon:
    """Simple CCW polygon with a convex decomposition.

    vertices: (n, 2) float array.
    convex_parts: tuple of vertex-index tuples whose union covers the polygon.
    """

    __slots__ = ("vertices", "convex_parts")

    def __init__(
        self,
        vertices: Iterable,
        convex_parts: Sequence[Sequence[int]] | None = None,
        *,
        validate: bool = True,
    ):
        verts = np.asarray(vertices, dtype=float)
        if verts.ndim != 2 or verts.shape[1] != 2:
            raise ValueError("polygon vertices must be an (n, 2) array")
        if validate:
            if len(verts) < 3:
                raise ValueError("polygon needs at least 3 vertices")
            if not np.all(np.isfinite(verts)):
                raise ValueError("polygon vertices must be finite")
            area = signed_area(verts)
            if area <= TOL:
                raise ValueError(
                    "polygon must be counter-clockwise with positive area"
                )
            if not _is_simple(verts):
                raise ValueError("polygon must be simple (no self-intersection)")
        self.vertices = verts
        if convex_parts is None:
            if _is_convex(verts):
                parts: tuple[tuple[int, ...], ...] = (tuple(range(len(verts))),)
            else:
                parts = tuple(ear_clip(verts))
        else:
            parts = tuple(tuple(int(i) for i in p) for p in convex_parts)
        self.convex_parts = parts

    def part_vertices(self) -> list[np.ndarray]:
        return [self.vertices[list(p)] for p in self.convex_parts]

    def __repr__(self):
        return f"Polygon({self.vertices.tolist()!r})"


def transform_polygon(poly: Polygon, pose: Pose2) -> Polygon:
    """Rotate by pose.theta about the origin, then translate by (pose.x, pose.y)."""
    c, s = math.cos(pose.theta), math.sin(pose.theta)
    r = np.array([[c, -s], [s, c]])
    verts = poly.vertices @ r.T + np.array([pose.x, pose.y])
    out = Polygon.__new__(Polygon)
    out.vertices = verts
    out.convex_parts = poly.convex_parts
    return out


# ---------------------------------------------------------------------------
# Convex-pair kernels (single query)
# ---------------------------------------------------------------------------


def _edge_normals(verts: np.ndarray) -> np.ndarray:
    edges = np.roll(verts, -1, axis=0) - verts
    return np.stack([edges[:, 1], -edges[:, 0]], axis=1)


def _convex_separated(va: np.ndarray, vb: np.ndarray) -> bool:
    """SAT over both polygons' edge normals; strict gaps only (closed sets)."""
    for verts, other in ((va, vb), (vb, va)):
        axes = _edge_normals(verts)
        pa = verts @ axes.T
        pb = other @ axes.T
        if np.any(pa.max(axis=0) < pb.min(axis=0)) or np.any(
            pb.max(axis=0) < pa.min(axis=0)
        ):
            return True
    return False


def _points_segments_dist(points: np.ndarray, segs_a: np.ndarray, segs_b: np.ndarray) -> float:
    ab = segs_b - segs_a
    denom = np.einsum("sk,sk->s", ab, ab)
    safe = np.where(denom > 0, denom, 1.0)
    ap = points[:, None, :] - segs_a[None, :, :]
    t = np.clip(np.einsum("psk,sk->ps", ap, ab) / safe, 0.0, 1.0)
    t = np.where(denom[None, :] > 0, t, 0.0)
    diff = ap - t[:, :, None] * ab[None, :, :]
    return float(np.sqrt(np.einsum("psk,psk->ps", diff, diff).min()))


def _convex_distance(va: np.ndarray, vb: np.ndarray) -> float:
    if not _convex_separated(va, vb):
        return 0.0
    sa, sb = va, np.roll(va, -1, axis=0)
    ta, tb = vb, np.roll(vb, -1, axis=0)
    d1 = _points_segments_dist(va, ta, tb)
    d2 = _points_segments_dist(vb, sa, sb)
    return min(d1, d2)


def polygons_intersect(a: Polygon, b: Polygon) -> bool:
    """Closed-set intersection test: touching boundaries intersect."""
    for pa in a.part_vertices():
        for pb in b.part_vertices():
            if not _convex_separated(pa, pb):
                return True
    return False


def polygon_distance(a: Polygon, b: Polygon) -> float:
    """Minimum distance between two closed polygons; 0 iff they intersect."""
    best = math.inf
    for pa in a.part_vertices():
        for pb in b.part_vertices():
            d = _convex_distance(pa, pb)
            if d == 0.0:
                return 0.0
            best = min(best, d)
    return best


# ---------------------------------------------------------------------------
# Batched scene kernels
#
# Collision checking and clearance dominate the planner runtime, so the scene
# caches flat numpy views of every convex part and all queries run batched
# over N configurations at once.
# ---------------------------------------------------------------------------


class _PartData:
    __slots__ = ("verts", "normals", "self_min", "self_max")

    def __init__(self, verts: np.ndarray):
        self.verts = verts
        self.normals = _edge_normals(verts)
        proj = verts @ self.normals.T
        self.self_min = proj.min(axis=0)
        self.self_max = proj.max(axis=0)


class _ObstacleGroup:
    """All obstacle convex parts with the same vertex count, stacked."""

    __slots__ = ("verts", "normals", "self_min", "self_max", "seg_a", "seg_b", "nparts")

    def __init__(self, parts: list[np.ndarray]):
        self.verts = np.stack(parts)  # (M, v, 2)
        edges = np.roll(self.verts, -1, axis=1) - self.verts
        self.normals = np.stack([edges[:, :, 1], -edges[:, :, 0]], axis=2)
        proj = np.einsum("mvk,mwk->mwv", self.verts, self.normals)
        self.self_min = proj.min(axis=2)  # (M, v)
        self.self_max = proj.max(axis=2)
        self.seg_a = self.verts.reshape(-1, 2)
        self.seg_b = np.roll(self.verts, -1, axis=1).reshape(-1, 2)
        self.nparts = self.verts.shape[0]


def _rotations(thetas: np.ndarray) -> np.ndarray:
    c, s = np.cos(thetas), np.sin(thetas)
    r = np.empty((len(thetas), 2, 2))
    r[:, 0, 0] = c
    r[:, 0, 1] = -s
    r[:, 1, 0] = s
    r[:, 1, 1] = c
    return r


def _segment_point_dist2(points, seg_a, seg_b):
    """points (N,P,2) vs per-row segments: seg_a/seg_b (S,2) shared across N."""
    ab = seg_b - seg_a
    denom = np.einsum("sk,sk->s", ab, ab)
    safe = np.where(denom > 0, denom, 1.0)
    ap = points[:, :, None, :] - seg_a[None, None, :, :]
    t = np.clip(np.einsum("npsk,sk->nps", ap, ab) / safe, 0.0, 1.0)
    t = np.where(denom[None, None, :] > 0, t, 0.0)
    diff = ap - t[..., None] * ab[None, None, :, :]
    return np.einsum("npsk,npsk->nps", diff, diff)


class _SceneKernels:
    """Precomputed geometry for one scene; all queries batched over configs."""

    def __init__(self, scene):
        self.bounds = np.asarray(scene.bounds, dtype=float)
        self.body_polys = list(scene.robot_bodies)
        self.body_parts: list[list[_PartData]] = [
            [_PartData(v) for v in poly.part_vertices()] for poly in self.body_polys
        ]
        self.body_verts: list[np.ndarray] = [p.vertices for p in self.body_polys]
        groups: dict[int, list[np.ndarray]] = {}
        for poly in scene.obstacles:
            for pv in poly.part_vertices():
                groups.setdefault(len(pv), []).append(pv)
        self.obstacle_groups = [_ObstacleGroup(parts) for parts in groups.values()]

    # -- placement ----------------------------------------------------------

    def _placed(self, local: np.ndarray, poses: np.ndarray):
        """local (u,2) at poses (N,3) -> world verts (N,u,2)."""
        r = _rotations(poses[:, 2])
        return np.einsum("uk,njk->nuj", local, r) + poses[:, None, :2]

    # -- bounds -------------------------------------------------------------

    def in_bounds(self, poses: np.ndarray) -> np.ndarray:
        """poses (nb, N, 3) -> (N,) bool: every placed body vertex inside bounds."""
        xmin, ymin, xmax, ymax = self.bounds
        n = poses.shape[1]
        ok = np.ones(n, dtype=bool)
        for b, local in enumerate(self.body_verts):
            wv = self._placed(local, poses[b])
            ok &= (
                (wv[:, :, 0] >= xmin).all(axis=1)
                & (wv[:, :, 0] <= xmax).all(axis=1)
                & (wv[:, :, 1] >= ymin).all(axis=1)
                & (wv[:, :, 1] <= ymax).all(axis=1)
            )
        return ok

    # -- collision ----------------------------------------------------------

    def _part_vs_obstacles_collide(self, part: _PartData, poses: np.ndarray) -> np.ndarray:
        """One body part at poses (N,3) vs all obstacles -> (N,) bool."""
        n = len(poses)
        hit = np.zeros(n, dtype=bool)
        if not self.obstacle_groups:
            return hit
        r = _rotations(poses[:, 2])
        wv = np.einsum("uk,njk->nuj", part.verts, r) + poses[:, None, :2]
        wa = np.einsum("uk,njk->nuj", part.normals, r)
        tdot = np.einsum("nuk,nk->nu", wa, poses[:, :2])
        rmin = part.self_min[None, :] + tdot
        rmax = part.self_max[None, :] + tdot
        for grp in self.obstacle_groups:
            proj = np.einsum("nuk,mvk->nmvu", wv, grp.normals)
            pmin, pmax = proj.min(axis=3), proj.max(axis=3)
            sep_o = ((pmin > grp.self_max[None]) | (pmax < grp.self_min[None])).any(axis=2)
            projr = np.einsum("mvk,nuk->nmuv", grp.verts, wa)
            omin, omax = projr.min(axis=3), projr.max(axis=3)
            sep_r = ((omin > rmax[:, None, :]) | (omax < rmin[:, None, :])).any(axis=2)
            hit |= (~(sep_o | sep_r)).any(axis=1)
        return hit

    def _body_pair_collide(self, pi: _PartData, poses_i, pj: _PartData, poses_j) -> np.ndarray:
        """Two moving parts, per-config SAT -> (N,) bool collide."""
        ri, rj = _rotations(poses_i[:, 2]), _rotations(poses_j[:, 2])
        wvi = np.einsum("uk,njk->nuj", pi.verts, ri) + poses_i[:, None, :2]
        wvj = np.einsum("uk,njk->nuj", pj.verts, rj) + poses_j[:, None, :2]
        sep = np.zeros(len(poses_i), dtype=bool)
        for part, rot, trans, other in (
            (pi, ri, poses_i[:, :2], wvj),
            (pj, rj, poses_j[:, :2], wvi),
        ):
            wa = np.einsum("uk,njk->nuj", part.normals, rot)
            tdot = np.einsum("nuk,nk->nu", wa, trans)
            smin = part.self_min[None, :] + tdot
            smax = part.self_max[None, :] + tdot
            proj = np.einsum("nwk,nuk->nuw", other, wa)
            omin, omax = proj.min(axis=2), proj.max(axis=2)
            sep |= ((omin > smax) | (omax < smin)).any(axis=1)
        return ~sep

    def collide(self, poses: np.ndarray) -> np.ndarray:
        """poses (nb, N, 3) -> (N,) bool: any body-obstacle or body-body overlap."""
        n = poses.shape[1]
        hit = np.zeros(n, dtype=bool)
        for b, parts in enumerate(self.body_parts):
            for part in parts:
                hit |= self._part_vs_obstacles_collide(part, poses[b])
        nb = len(self.body_parts)
        for i in range(nb):
            for j in range(i + 1, nb):
                for pi in self.body_parts[i]:
                    for pj in self.body_parts[j]:
                        hit |= self._body_pair_collide(pi, poses[i], pj, poses[j])
        return hit

    def free(self, poses: np.ndarray) -> np.ndarray:
        return self.in_bounds(poses) & ~self.collide(poses)

    # -- clearance ----------------------------------------------------------

    def _part_vs_obstacles_dist2(self, part: _PartData, poses: np.ndarray) -> np.ndarray:
        """Min squared distance to any obstacle, 0 where colliding -> (N,)."""
        n = len(poses)
        if not self.obstacle_groups:
            return np.full(n, np.inf)
        r = _rotations(poses[:, 2])
        wv = np.einsum("uk,njk->nuj", part.verts, r) + poses[:, None, :2]
        robot_a = wv
        robot_b = np.roll(wv, -1, axis=1)
        best = np.full(n, np.inf)
        collide = self._part_vs_obstacles_collide(part, poses)
        for grp in self.obstacle_groups:
            d1 = _segment_point_dist2(wv, grp.seg_a, grp.seg_b).min(axis=(1, 2))
            overts = grp.verts.reshape(-1, 2)
            ab = robot_b - robot_a  # (N,u,2)
            denom = np.einsum("nuk,nuk->nu", ab, ab)
            safe = np.where(denom > 0, denom, 1.0)
            ap = overts[None, :, None, :] - robot_a[:, None, :, :]  # (N,S,u,2)
            t = np.clip(np.einsum("nsuk,nuk->nsu", ap, ab) / safe[:, None, :], 0.0, 1.0)
            t = np.where(denom[:, None, :] > 0, t, 0.0)
            diff = ap - t[..., None] * ab[:, None, :, :]
            d2 = np.einsum("nsuk,nsuk->nsu", diff, diff).min(axis=(1, 2))
            best = np.minimum(best, np.minimum(d1, d2))
        best[collide] = 0.0
        return best

    def _body_pair_dist2(self, pi: _PartData, poses_i, pj: _PartData, poses_j) -> np.ndarray:
        ri, rj = _rotations(poses_i[:, 2]), _rotations(poses_j[:, 2])
        wvi = np.einsum("uk,njk->nuj", pi.verts, ri) + poses_i[:, None, :2]
        wvj = np.einsum("uk,njk->nuj", pj.verts, rj) + poses_j[:, None, :2]
        out = np.full(len(poses_i), np.inf)
        for pts, seg_v in ((wvi, wvj), (wvj, wvi)):
            a = seg_v
            b = np.roll(seg_v, -1, axis=1)
            ab = b - a
            denom = np.einsum("nwk,nwk->nw", ab, ab)
            safe = np.where(denom > 0, denom, 1.0)
            ap = pts[:, :, None, :] - a[:, None, :, :]
            t = np.clip(np.einsum("nuwk,nwk->nuw", ap, ab) / safe[:, None, :], 0.0, 1.0)
            t = np.where(denom[:, None, :] > 0, t, 0.0)
            diff = ap - t[..., None] * ab[:, None, :, :]
            out = np.minimum(out, np.einsum("nuwk,nuwk->nuw", diff, diff).min(axis=(1, 2)))
        out[self._body_pair_collide(pi, poses_i, pj, poses_j)] = 0.0
        return out

    def clearance(self, poses: np.ndarray) -> np.ndarray:
        """poses (nb, N, 3) -> (N,) min distance to obstacles (and between bodies)."""
        n = poses.shape[1]
        best = np.full(n, np.inf)
        for b, parts in enumerate(self.body_parts):
            for part in parts:
                best = np.minimum(best, self._part_vs_obstacles_dist2(part, poses[b]))
        nb = len(self.body_parts)
        for i in range(nb):
            for j in range(i + 1, nb):
                for pi in self.body_parts[i]:
                    for pj in self.body_parts[j]:
                        best = np.minimum(best, self._body_pair_dist2(pi, poses[i], pj, poses[j]))
        return np.sqrt(best)


def scene_kernels(scene) -> _SceneKernels:
    """Cached batched kernels for a scene (built on first use)."""
    k = getattr(scene, "_pm_kernels", None)
    if k is None:
        k = _SceneKernels(scene)
        try:
            scene._pm_kernels = k
        except AttributeError:
            pass
    return k


def scene_clearance(scene, config) -> float:
    """Minimum distance from the robot placed at config to any obstacle.

    For multi-body configurations the minimum also runs over body-body pairs.
    Returns 0 exactly when the configuration is in collision.
    """
    poses = np.array(
        [[[p.x, p.y, p.theta]] for p in config.poses], dtype=float
    )  # (nb, 1, 3)
    val = scene_kernels(scene).clearance(poses)[0]
    return float(val)
