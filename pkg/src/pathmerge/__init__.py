"""Multi-path motion planning for planar rigid bodies: plan with PRM or RRT,
merge several solutions into a hybridization graph, and extract the best
route under a chosen path-quality measure."""

from .cspace import (
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
from .geometry import Point2, Polygon, Pose2, polygon_distance, polygons_intersect, scene_clearance
from .hgraph import (
    AllPairs,
    EdgeGeometry,
    EditDistance,
    EditDistanceNeighborhood,
    HGraph,
    Neighborhood,
    build_hgraph,
    extract_best_node_ids,
    extract_best_path,
    graph_path_value,
    hgraph_to_doc,
)
from .pathmatch import Alignment, DpTables, MatchParams, bridge_candidates, match_paths
from .planners import (
    AllCycles,
    NoCycles,
    Path,
    PlanFailure,
    PrmParams,
    RrtParams,
    UsefulCycles,
    prm_plan,
    rrt_plan,
    shortcut,
    validate_path,
)
from .quality import (
    QualityMeasure,
    average_clearance,
    bottleneck_clearance,
    evaluate_measure,
    integrated_k_inverse_clearance,
    kinv,
    measure_name,
    parse_measure,
    path_length,
)
from .scene import (
    PathRecord,
    Scene,
    SceneValidationError,
    load_path_record,
    load_scene,
    make_grid_scene,
    make_maze_scene,
    make_path_record,
    path_record_to_json,
    scene_hash,
    serialize_scene,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
