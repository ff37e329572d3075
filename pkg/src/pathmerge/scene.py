"""Scene model, JSON round-tripping, content hashing, and scene generators.

A scene is a rectangular workspace with polygonal obstacles, one or more robot
body polygons given in body-local frame (reference point at the centroid), a
start/goal query, metric weights, and two resolution knobs: eps_res for the
local planner and clearance_sample_step for quality sampling along edges.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .cspace import Config, MetricWeights, is_free
from .geometry import Polygon, Pose2
from .planners import Path


class SceneValidationError(ValueError):
    """Scene document failed validation; the message names the offending field."""


@dataclass(eq=False)
class Scene:
    bounds: tuple[float, float, float, float]
    robot_bodies: list[Polygon]
    obstacles: list[Polygon]
    weights: MetricWeights
    start: Config
    goal: Config
    eps_res: float
    clearance_sample_step: float

    @property
    def diameter(self) -> float:
        xmin, ymin, xmax, ymax = self.bounds
        return math.hypot(xmax - xmin, ymax - ymin)


def default_eps_res(bounds) -> float:
    xmin, ymin, xmax, ymax = bounds
    return 0.01 * math.hypot(xmax - xmin, ymax - ymin)


# ---------------------------------------------------------------------------
# JSON round trip
# ---------------------------------------------------------------------------


def _poly_doc(poly: Polygon) -> list[list[float]]:
    return [[float(x), float(y)] for x, y in poly.vertices]


def _config_doc(c: Config) -> list[list[float]]:
    return [[p.x, p.y, p.theta] for p in c.poses]


def scene_to_doc(scene: Scene) -> dict:
    return {
        "bounds": [float(v) for v in scene.bounds],
        "robot_bodies": [_poly_doc(p) for p in scene.robot_bodies],
        "obstacles": [_poly_doc(p) for p in scene.obstacles],
        "weights": {
            "w_trans": scene.weights.w_trans,
            "w_rot": scene.weights.w_rot,
        },
        "query": {
            "start": _config_doc(scene.start),
            "goal": _config_doc(scene.goal),
        },
        "eps_res": scene.eps_res,
        "clearance_sample_step": scene.clearance_sample_step,
    }


def serialize_scene(scene: Scene) -> str:
    return json.dumps(scene_to_doc(scene), indent=2) + "\n"


def scene_hash(scene: Scene) -> str:
    """Hex digest of the canonical (sorted, compact) scene serialization."""
    canonical = json.dumps(scene_to_doc(scene), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def _parse_config(doc, nbodies: int, where: str) -> Config:
    if not isinstance(doc, list) or len(doc) != nbodies:
        raise SceneValidationError(
            f"{where}: expected {nbodies} [x, y, theta] rows, one per robot body"
        )
    poses = []
    for row in doc:
        if not isinstance(row, list) or len(row) != 3:
            raise SceneValidationError(f"{where}: each row must be [x, y, theta]")
        if not all(isinstance(v, (int, float)) and math.isfinite(v) for v in row):
            raise SceneValidationError(f"{where}: values must be finite numbers")
        poses.append(Pose2(float(row[0]), float(row[1]), float(row[2])))
    return Config(tuple(poses))


def load_scene(text: str) -> Scene:
    """Parse and validate a scene document; raises SceneValidationError."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SceneValidationError(f"document: not valid JSON ({exc})") from exc
    if not isinstance(doc, dict):
        raise SceneValidationError("document: top level must be an object")

    for key in ("bounds", "robot_bodies", "obstacles", "weights", "query"):
        if key not in doc:
            raise SceneValidationError(f"{key}: missing required field")

    bounds_doc = doc["bounds"]
    if (
        not isinstance(bounds_doc, list)
        or len(bounds_doc) != 4
        or not all(isinstance(v, (int, float)) and math.isfinite(v) for v in bounds_doc)
    ):
        raise SceneValidationError("bounds: must be [xmin, ymin, xmax, ymax]")
    xmin, ymin, xmax, ymax = (float(v) for v in bounds_doc)
    if xmax < xmin or ymax < ymin:
        raise SceneValidationError("bounds: max corner must not precede min corner")
    bounds = (xmin, ymin, xmax, ymax)

    def parse_polys(key: str) -> list[Polygon]:
        items = doc[key]
        if not isinstance(items, list):
            raise SceneValidationError(f"{key}: must be a list of polygons")
        polys = []
        for i, verts in enumerate(items):
            try:
                polys.append(Polygon(verts))
            except ValueError as exc:
                raise SceneValidationError(f"{key}[{i}]: {exc}") from exc
        return polys

    robot_bodies = parse_polys("robot_bodies")
    if not robot_bodies:
        raise SceneValidationError("robot_bodies: at least one body required")
    obstacles = parse_polys("obstacles")

    wdoc = doc["weights"]
    if not isinstance(wdoc, dict) or "w_trans" not in wdoc or "w_rot" not in wdoc:
        raise SceneValidationError("weights: must contain w_trans and w_rot")
    try:
        weights = MetricWeights(float(wdoc["w_trans"]), float(wdoc["w_rot"]))
    except ValueError as exc:
        raise SceneValidationError(f"weights: {exc}") from exc

    qdoc = doc["query"]
    if not isinstance(qdoc, dict) or "start" not in qdoc or "goal" not in qdoc:
        raise SceneValidationError("query: must contain start and goal")
    start = _parse_config(qdoc["start"], len(robot_bodies), "query.start")
    goal = _parse_config(qdoc["goal"], len(robot_bodies), "query.goal")

    eps_res = doc.get("eps_res", default_eps_res(bounds))
    step = doc.get("clearance_sample_step", eps_res)

    scene = Scene(
        bounds=bounds,
        robot_bodies=robot_bodies,
        obstacles=obstacles,
        weights=weights,
        start=start,
        goal=goal,
        eps_res=float(eps_res),
        clearance_sample_step=float(step),
    )
    validate_scene(scene)
    return scene


def validate_scene(scene: Scene) -> None:
    if not scene.eps_res > 0:
        raise SceneValidationError("eps_res: must be positive")
    if not scene.clearance_sample_step > 0:
        raise SceneValidationError("clearance_sample_step: must be positive")
    for name, cfg in (("query.start", scene.start), ("query.goal", scene.goal)):
        if len(cfg.poses) != len(scene.robot_bodies):
            raise SceneValidationError(f"{name}: pose count does not match body count")
        if not is_free(scene, cfg):
            raise SceneValidationError(
                f"{name}: configuration is invalid (in collision or out of bounds)"
            )


# ---------------------------------------------------------------------------
# Path files
# ---------------------------------------------------------------------------


@dataclass
class PathRecord:
    path: Path
    scene_hash: str
    meta: dict = field(default_factory=dict)


def path_record_to_json(rec: PathRecord) -> str:
    doc = {
        "scene_hash": rec.scene_hash,
        "dof": rec.path.nodes[0].dof,
        "nodes": [_config_doc(c) for c in rec.path.nodes],
        "meta": rec.meta,
    }
    return json.dumps(doc, indent=2) + "\n"


def make_path_record(path: Path, scene: Scene, planner: str, seed: int, wall_time_s: float) -> PathRecord:
    return PathRecord(
        path=path,
        scene_hash=scene_hash(scene),
        meta={"planner": planner, "seed": seed, "wall_time_s": wall_time_s},
    )


def load_path_record(text: str) -> PathRecord:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError(f"path document: not valid JSON ({exc})") from exc
    for key in ("scene_hash", "dof", "nodes"):
        if key not in doc:
            raise ValueError(f"path document: missing field {key}")
    nodes_doc = doc["nodes"]
    if not isinstance(nodes_doc, list) or len(nodes_doc) < 2:
        raise ValueError("path document: needs at least 2 nodes")
    dof = int(doc["dof"])
    if dof % 3 != 0 or dof <= 0:
        raise ValueError("path document: dof must be a positive multiple of 3")
    nbodies = dof // 3
    nodes = [_parse_config(row, nbodies, f"nodes[{i}]") for i, row in enumerate(nodes_doc)]
    return PathRecord(
        path=Path(nodes),
        scene_hash=str(doc["scene_hash"]),
        meta=dict(doc.get("meta", {})),
    )


# ---------------------------------------------------------------------------
# Scene generators
# ---------------------------------------------------------------------------


def _rect(x0: float, y0: float, x1: float, y1: float) -> Polygon:
    return Polygon([[x0, y0], [x1, y0], [x1, y1], [x0, y1]])


def make_grid_scene(rows: int = 4, passages_per_row: int = 4, shift: float = 1.2) -> Scene:
    """Elongated rotating rectangle vs. rows of walls pierced by passages.

    Passages are narrower than the robot is long, so every row crossing forces
    a rotation; even rows are shifted sideways so no two consecutive rows have
    vertically aligned passages, which forces lateral zigzagging.
    """
    if rows < 1:
        raise ValueError("rows must be >= 1")
    if passages_per_row < 1:
        raise ValueError("passages_per_row must be >= 1")

    spacing = 3.0      # horizontal distance between passage centers
    gap = 1.0          # passage width
    wall_h = 0.4       # wall thickness
    pitch = 3.0        # vertical distance between consecutive rows
    margin = 2.5       # free band above and below the grid
    width = spacing * passages_per_row
    height = margin + pitch * (rows - 1) + wall_h + margin

    obstacles: list[Polygon] = []
    for i in range(rows):
        y0 = margin + pitch * i
        centers = [spacing * (j + 0.5) for j in range(passages_per_row)]
        if i % 2 == 0:
            centers = [c + shift for c in centers]
        intervals = sorted(
            (max(0.0, c - gap / 2), min(width, c + gap / 2)) for c in centers
        )
        for (a0, a1), (b0, b1) in zip(intervals, intervals[1:]):
            if b0 < a1 - 1e-9:
                raise ValueError(
                    "grid parameters produce overlapping passages within a row"
                )
        x = 0.0
        for g0, g1 in intervals:
            if g0 - x > 1e-9:
                obstacles.append(_rect(x, y0, g0, y0 + wall_h))
            x = max(x, g1)
        if width - x > 1e-9:
            obstacles.append(_rect(x, y0, width, y0 + wall_h))

    # Rod longer than the passages: axis-aligned pass-through is impossible.
    rod = Polygon([[-1.0, -0.2], [1.0, -0.2], [1.0, 0.2], [-1.0, 0.2]])
    scene = Scene(
        bounds=(0.0, 0.0, width, height),
        robot_bodies=[rod],
        obstacles=obstacles,
        weights=MetricWeights(w_trans=1.0, w_rot=0.00005),
        start=Config((Pose2(width / 2, height - margin / 2, 0.0),)),
        goal=Config((Pose2(width / 2, margin / 2, 0.0),)),
        eps_res=0.002,
        clearance_sample_step=0.02,
    )
    validate_scene(scene)
    return scene


def make_maze_scene() -> Scene:
    """Square translating robot in a serpentine corridor with dead-end alcoves.

    The main corridor snakes between four alternating wall teeth; blind
    pockets hang off it so planners waste samples on branches that lead
    nowhere.  Every obstacle is attached to the boundary or to a tooth, so the
    free space keeps a single homotopy class of start-goal paths.
    """
    teeth = [
        _rect(0.0, 2.2, 11.2, 2.8),    # gap on the right
        _rect(2.8, 5.0, 14.0, 5.6),    # gap on the left
        _rect(0.0, 7.8, 11.2, 8.4),    # gap on the right
        _rect(2.8, 10.6, 14.0, 11.2),  # gap on the left
    ]
    alcoves = [
        # left-wall pocket in corridor (2.8, 5.0)
        _rect(0.0, 2.8, 1.2, 3.4),
        _rect(0.0, 4.4, 1.2, 5.0),
        # pocket standing on tooth 1, opening upward
        _rect(6.0, 2.8, 6.6, 4.0),
        _rect(8.2, 2.8, 8.8, 4.0),
        # right-wall pocket in corridor (5.6, 7.8)
        _rect(12.8, 5.6, 14.0, 6.2),
        _rect(12.8, 7.2, 14.0, 7.8),
        # pocket hanging from tooth 3, opening downward
        _rect(4.0, 6.6, 4.6, 7.8),
        _rect(6.2, 6.6, 6.8, 7.8),
        # left-wall pocket in corridor (8.4, 10.6)
        _rect(0.0, 8.4, 1.2, 9.0),
        _rect(0.0, 10.0, 1.2, 10.6),
        # pocket standing on tooth 4, opening upward
        _rect(5.0, 11.2, 5.6, 12.4),
        _rect(7.2, 11.2, 7.8, 12.4),
    ]
    square = Polygon([[-0.2, -0.2], [0.2, -0.2], [0.2, 0.2], [-0.2, 0.2]])
    scene = Scene(
        bounds=(0.0, 0.0, 14.0, 14.0),
        robot_bodies=[square],
        obstacles=teeth + alcoves,
        weights=MetricWeights(w_trans=1.0, w_rot=0.0),
        start=Config((Pose2(1.0, 12.8, 0.0),)),
        goal=Config((Pose2(1.0, 1.1, 0.0),)),
        eps_res=0.05,
        # dense clearance sampling: keeps sampled minima within a fraction
        # of a percent of the true minima for paths kept off the walls
        clearance_sample_step=0.002,
    )
    validate_scene(scene)
    return scene
