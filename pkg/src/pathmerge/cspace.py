"""Configuration space of r planar rigid bodies: metric, interpolation, validity.

A configuration is one pose per robot body.  Distances use a weighted metric:
translation counts at w_trans per unit, rotation at w_rot per radian (squared,
summed over bodies, square-rooted).  Angular differences always take the short
way around, with a tie at exactly pi resolved in the positive direction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import Pose2, scene_kernels, signed_angle_diff, wrap_angle

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class MetricWeights:
    w_trans: float = 1.0
    w_rot: float = 0.0

    def __post_init__(self):
        if not self.w_trans > 0:
            raise ValueError("w_trans must be positive")
        if self.w_rot < 0:
            raise ValueError("w_rot must be non-negative")


@dataclass(frozen=True)
class Config:
    """One Pose2 per robot body."""

    poses: tuple[Pose2, ...]

    def __init__(self, poses):
        object.__setattr__(self, "poses", tuple(poses))

    @property
    def dof(self) -> int:
        return 3 * len(self.poses)

    def to_array(self) -> np.ndarray:
        """(nb, 3) array of [x, y, theta] rows."""
        return np.array([[p.x, p.y, p.theta] for p in self.poses], dtype=float)


def config(*xyts) -> Config:
    """Shorthand: config((x, y, th), ...) or config(x, y, th) for one body."""
    if len(xyts) == 3 and all(isinstance(v, (int, float)) for v in xyts):
        return Config((Pose2(*xyts),))
    return Config(tuple(Pose2(*t) for t in xyts))


def config_from_array(arr: np.ndarray) -> Config:
    return Config(tuple(Pose2(float(r[0]), float(r[1]), float(r[2])) for r in arr))


def config_distance(a: Config, b: Config, weights: MetricWeights) -> float:
    """Weighted SE(2)^r metric; angular terms use the wrapped difference."""
    if len(a.poses) != len(b.poses):
        raise ValueError("configuration body counts differ")
    acc = 0.0
    for pa, pb in zip(a.poses, b.poses):
        # |delta| folded to [0, pi]; computed from abs() so the metric is
        # symmetric bit for bit
        dth = abs(pb.theta - pa.theta)
        if dth > math.pi:
            dth = 2.0 * math.pi - dth
        acc += (weights.w_trans * ((pb.x - pa.x) ** 2 + (pb.y - pa.y) ** 2)
                + weights.w_rot * dth * dth)
    return math.sqrt(acc)


def interpolate(a: Config, b: Config, t: float) -> Config:
    """Straight-line interpolation: linear in position, shortest arc in angle."""
    if not 0.0 <= t <= 1.0:
        raise ValueError("interpolation parameter must lie in [0, 1]")
    if len(a.poses) != len(b.poses):
        raise ValueError("configuration body counts differ")
    poses = []
    for pa, pb in zip(a.poses, b.poses):
        dth = signed_angle_diff(pa.theta, pb.theta)
        poses.append(
            Pose2(
                pa.x + t * (pb.x - pa.x),
                pa.y + t * (pb.y - pa.y),
                wrap_angle(pa.theta + t * dth),
            )
        )
    return Config(tuple(poses))


# ---------------------------------------------------------------------------
# Batched helpers (internal): configurations as (nb, N, 3) arrays
# ---------------------------------------------------------------------------


def _pair_arrays(a: Config, b: Config):
    aa, bb = a.to_array(), b.to_array()
    dth = np.array(
        [signed_angle_diff(pa.theta, pb.theta) for pa, pb in zip(a.poses, b.poses)]
    )
    return aa, bb, dth


def interpolate_batch(a: Config, b: Config, ts: np.ndarray) -> np.ndarray:
    """Configs along the straight segment at parameters ts -> (nb, len(ts), 3)."""
    aa, bb, dth = _pair_arrays(a, b)
    nb = len(aa)
    out = np.empty((nb, len(ts), 3))
    for i in range(nb):
        out[i, :, 0] = aa[i, 0] + ts * (bb[i, 0] - aa[i, 0])
        out[i, :, 1] = aa[i, 1] + ts * (bb[i, 1] - aa[i, 1])
        out[i, :, 2] = (aa[i, 2] + ts * dth[i]) % TWO_PI
    return out


def free_mask(scene, poses: np.ndarray) -> np.ndarray:
    """poses (nb, N, 3) -> (N,) bool validity mask."""
    return scene_kernels(scene).free(poses)


def is_free(scene, c: Config) -> bool:
    """True iff the robot at c lies inside the workspace bounds and collides
    with nothing (touching counts as collision)."""
    poses = c.to_array()[:, None, :]
    return bool(free_mask(scene, poses)[0])


def local_plan(scene, a: Config, b: Config, eps_res: float) -> bool:
    """Validate the straight-line motion from a to b.

    Recursive midpoint subdivision: the midpoint of every open interval is
    checked before its halves, and subdivision stops once adjacent checked
    configurations are within eps_res of each other.  Evaluated one bisection
    generation at a time so each generation is a single batched collision
    query; the checked set and the outcome match the plain recursion.
    """
    if eps_res <= 0:
        raise ValueError("eps_res must be positive")
    ends = np.stack([a.to_array(), b.to_array()], axis=1)  # (nb, 2, 3)
    if not free_mask(scene, ends).all():
        return False
    d = config_distance(a, b, scene.weights)
    if d <= eps_res:
        return True
    depth = max(1, math.ceil(math.log2(d / eps_res)))
    if depth > 40:
        raise ValueError("subdivision depth exceeds sanity bound")
    for g in range(1, depth + 1):
        ts = np.arange(1, 2**g, 2, dtype=float) / float(2**g)
        poses = interpolate_batch(a, b, ts)
        if not free_mask(scene, poses).all():
            return False
    return True


def sample_uniform(scene, rng: np.random.Generator) -> Config:
    """Draw one configuration: positions uniform in the workspace bounds.

    Angles are uniform in [0, 2*pi) when the metric sees rotation (w_rot > 0).
    With w_rot == 0 the local planner cannot resolve rotary motion, so such
    scenes are treated as translation-only and every sample keeps the start
    orientation.
    """
    xmin, ymin, xmax, ymax = scene.bounds
    rotating = scene.weights.w_rot > 0
    poses = []
    for body_idx in range(len(scene.robot_bodies)):
        x = float(rng.uniform(xmin, xmax))
        y = float(rng.uniform(ymin, ymax))
        if rotating:
            theta = float(rng.uniform(0.0, TWO_PI))
        else:
            theta = scene.start.poses[body_idx].theta
        poses.append(Pose2(x, y, theta))
    return Config(tuple(poses))
