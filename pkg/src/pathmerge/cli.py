"""Command-line interface: plan, hybridize, evaluate, bench, render.

Exit codes: 0 success, 1 bad arguments/inputs, 2 planner failure.  Stochastic
commands require an explicit --seed; nothing is seeded from the clock.  Scene
references are either a JSON file path or builtin:<name> for the bundled
generators (builtin:grid, builtin:maze).
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time

from .hgraph import (
    AllPairs,
    EditDistance,
    EditDistanceNeighborhood,
    Neighborhood,
    build_hgraph,
    extract_best_path,
    hgraph_to_doc,
)
from .pathmatch import MatchParams
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
)
from .quality import QualityMeasure, evaluate_measure, kinv, measure_name, parse_measure
from .scene import (
    SceneValidationError,
    load_path_record,
    load_scene,
    make_grid_scene,
    make_maze_scene,
    make_path_record,
    path_record_to_json,
    scene_hash,
)

_PALETTE = ("#d62728", "#1f77b4", "#2ca02c", "#ff7f0e",
            "#9467bd", "#8c564b", "#e377c2", "#17becf")

_BUILTIN_SCENES = {"grid": make_grid_scene, "maze": make_maze_scene}


class _CliError(Exception):
    """Bad arguments or inputs; maps to exit code 1."""


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad flags by default; this tool reserves 2 for
    # planner failure, so argument problems must exit 1 instead
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _CliError(message)


def _fmt(v: float) -> str:
    return f"{v:.6g}"


def _load_scene_ref(ref: str):
    if ref.startswith("builtin:"):
        name = ref.split(":", 1)[1]
        if name not in _BUILTIN_SCENES:
            raise _CliError(f"unknown builtin scene {name!r}; have: "
                            + ", ".join(sorted(_BUILTIN_SCENES)))
        return _BUILTIN_SCENES[name]()
    try:
        with open(ref, encoding="utf-8") as fh:
            return load_scene(fh.read())
    except OSError as exc:
        raise _CliError(f"cannot read scene {ref!r}: {exc}") from exc
    except SceneValidationError as exc:
        raise _CliError(f"invalid scene {ref!r}: {exc}") from exc


def _load_records(scene, path_files):
    """Load path files, rejecting any whose scene hash mismatches, before any
    other computation happens."""
    want = scene_hash(scene)
    records = []
    for pf in path_files:
        try:
            with open(pf, encoding="utf-8") as fh:
                rec = load_path_record(fh.read())
        except OSError as exc:
            raise _CliError(f"cannot read path {pf!r}: {exc}") from exc
        except (ValueError, KeyError) as exc:
            raise _CliError(f"invalid path file {pf!r}: {exc}") from exc
        if rec.scene_hash != want:
            raise _CliError(
                f"scene hash mismatch: {pf!r} was planned for a different scene")
        records.append(rec)
    return records


def _measure_from_args(measure: str, k: float | None) -> QualityMeasure:
    if measure == "kinv":
        if k is None:
            raise _CliError("--measure kinv needs --k (or spell it kinv:<k>)")
        return kinv(k)
    if k is not None:
        raise _CliError("--k only applies to --measure kinv")
    try:
        return parse_measure(measure)
    except ValueError as exc:
        raise _CliError(str(exc)) from exc


def _write_text(path: str, text: str):
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        raise _CliError(f"cannot write {path!r}: {exc}") from exc


# ---------------------------------------------------------------- plan

def _cycle_mode(name: str, gamma: float):
    if name == "none":
        return NoCycles()
    if name == "all":
        return AllCycles()
    return UsefulCycles(gamma)


def cmd_plan(args) -> int:
    scene = _load_scene_ref(args.scene)
    t0 = time.perf_counter()
    stats: dict = {}
    if args.planner == "prm":
        params = PrmParams(
            n_samples=args.samples,
            k_neighbors=args.neighbors,
            cycle_mode=_cycle_mode(args.cycles, args.gamma),
            time_budget_s=args.budget_s,
            seed=args.seed,
        )
        result = prm_plan(scene, params, stats)
    else:
        step = args.step if args.step is not None else 0.05 * scene.diameter
        params = RrtParams(step=step, goal_bias=args.goal_bias,
                           max_iters=args.max_iters, seed=args.seed)
        result = rrt_plan(scene, params, stats)
    elapsed = time.perf_counter() - t0

    if isinstance(result, PlanFailure):
        print(f"planning failed: {result}", file=sys.stderr)
        return 2
    if args.shortcut_iters:
        result = shortcut(scene, result, args.shortcut_iters, seed=args.seed)
    record = make_path_record(result, scene, planner=args.planner,
                              seed=args.seed, wall_time_s=elapsed)
    _write_text(args.out, path_record_to_json(record))
    print(f"{args.planner}: {len(result.nodes)} nodes, "
          f"{stats.get('local_plan_calls', 0)} local-plan calls, "
          f"{_fmt(elapsed)}s -> {args.out}")
    return 0


# ---------------------------------------------------------------- hybridize

def _variant_from_args(args):
    match = MatchParams(gap_ext=args.gap_ext, gap_init=args.gap_init,
                        delta_scale=args.delta_scale)
    if args.variant == "all-pairs":
        return AllPairs()
    if args.variant == "neighborhood":
        return Neighborhood(args.radius)
    if args.variant == "edit":
        return EditDistance(match)
    return EditDistanceNeighborhood(match, args.radius)


_HYBRID_STATS_MEASURES = ("length", "bottleneck")


def cmd_hybridize(args) -> int:
    scene = _load_scene_ref(args.scene)
    records = _load_records(scene, args.paths)
    paths = [r.path for r in records]
    variant = _variant_from_args(args)
    measure = _measure_from_args(args.measure, args.k)

    stats: dict = {}
    t0 = time.perf_counter()
    graph = build_hgraph(scene, paths, variant, stats)
    best = extract_best_path(graph, measure)
    elapsed = time.perf_counter() - t0

    record = make_path_record(best, scene, planner=f"hybrid:{args.variant}",
                              seed=None, wall_time_s=elapsed)
    _write_text(args.out, path_record_to_json(record))
    if args.graph_out:
        _write_text(args.graph_out,
                    json.dumps(hgraph_to_doc(graph), indent=2) + "\n")

    measures = [measure] + [parse_measure(n) for n in _HYBRID_STATS_MEASURES
                            if n != measure_name(measure)]
    rows = [("local_planner_calls", "", "", str(stats["local_plan_calls"])),
            ("build_time_s", "", "", _fmt(stats["build_time_s"]))]
    for m in measures:
        for i, p in enumerate(paths):
            rows.append(("quality", f"input:{i}", measure_name(m),
                         _fmt(evaluate_measure(scene, p, m))))
        rows.append(("quality", "output", measure_name(m),
                     _fmt(evaluate_measure(scene, best, m))))
    if args.stats:
        _write_stats_csv(args.stats, rows)
    out_val = evaluate_measure(scene, best, measure)
    print(f"hybrid[{args.variant}]: {graph.variant_meta.local_plan_calls} "
          f"local-plan calls, {measure_name(measure)}={_fmt(out_val)} -> {args.out}")
    return 0


def _write_stats_csv(path: str, rows):
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(("stat", "path", "measure", "value"))
            writer.writerows(rows)
    except OSError as exc:
        raise _CliError(f"cannot write {path!r}: {exc}") from exc


# ---------------------------------------------------------------- evaluate

def cmd_evaluate(args) -> int:
    scene = _load_scene_ref(args.scene)
    record = _load_records(scene, [args.path])[0]
    names = [n.strip() for n in args.measures.split(",") if n.strip()]
    if not names:
        raise _CliError("no measures given")
    try:
        measures = [parse_measure(n) for n in names]
    except ValueError as exc:
        raise _CliError(str(exc)) from exc
    rows = []
    for m in measures:
        value = evaluate_measure(scene, record.path, m)
        rows.append((args.path, measure_name(m), _fmt(value)))
        print(f"{measure_name(m)} {_fmt(value)}")
    if args.csv:
        try:
            with open(args.csv, "w", newline="", encoding="utf-8") as fh:
                writer = csv.writer(fh)
                writer.writerow(("path", "measure", "value"))
                writer.writerows(rows)
        except OSError as exc:
            raise _CliError(f"cannot write {args.csv!r}: {exc}") from exc
    return 0


# ---------------------------------------------------------------- bench

def _bench_scene(entry: dict):
    if "builtin" in entry:
        name = entry["builtin"]
        if name not in _BUILTIN_SCENES:
            raise _CliError(f"unknown builtin scene {name!r} in bench config")
        return _BUILTIN_SCENES[name]()
    if "file" in entry:
        return _load_scene_ref(entry["file"])
    raise _CliError("bench scene entry needs 'builtin' or 'file'")


def _method_prm_params(method: dict, seed: int, budget_s: float | None) -> PrmParams:
    return PrmParams(
        n_samples=int(method.get("samples", 100000 if budget_s else 500)),
        k_neighbors=int(method.get("k_neighbors", 15)),
        cycle_mode=_cycle_mode(method.get("cycles", "none"),
                               float(method.get("gamma", 3.0))),
        time_budget_s=budget_s,
        seed=seed,
    )


def _run_bench_cell(scene, method: dict, seed: int, budget_s: float | None,
                    measures) -> tuple[bool, float, int, dict[str, float]]:
    """One (scene, method, seed) cell; returns (success, wall_time, calls,
    values per measure name)."""
    kind = method.get("kind", "prm")
    t0 = time.perf_counter()
    calls = 0
    values: dict[str, float] = {}

    if kind in ("prm", "prm-shortcut"):
        stats: dict = {}
        result = prm_plan(scene, _method_prm_params(method, seed, budget_s), stats)
        calls = stats.get("local_plan_calls", 0)
        if isinstance(result, PlanFailure):
            return False, time.perf_counter() - t0, calls, values
        if kind == "prm-shortcut":
            iters = int(method.get("shortcut_iters", 200))
            if budget_s is not None:
                # spend whatever budget planning left on shortcut rounds
                rounds = 0
                while time.perf_counter() - t0 < budget_s:
                    result = shortcut(scene, result, iters, seed=seed + rounds)
                    rounds += 1
            else:
                result = shortcut(scene, result, iters, seed=seed)
        for m in measures:
            values[measure_name(m)] = evaluate_measure(scene, result, m)
        return True, time.perf_counter() - t0, calls, values

    if kind == "hybrid":
        runs = int(method.get("runs", 5))
        run_budget = budget_s / runs if budget_s is not None else None
        paths = []
        for i in range(runs):
            stats = {}
            result = prm_plan(scene,
                              _method_prm_params(method, seed * 1000 + i, run_budget),
                              stats)
            calls += stats.get("local_plan_calls", 0)
            if isinstance(result, Path):
                paths.append(result)
        if not paths:
            return False, time.perf_counter() - t0, calls, values
        variant = _bench_variant(method)
        hstats: dict = {}
        graph = build_hgraph(scene, paths, variant, hstats)
        calls += hstats["local_plan_calls"]
        for m in measures:
            best = extract_best_path(graph, m)
            values[measure_name(m)] = evaluate_measure(scene, best, m)
        return True, time.perf_counter() - t0, calls, values

    raise _CliError(f"unknown bench method kind {kind!r}")


def _bench_variant(method: dict):
    name = method.get("variant", "edit-neighborhood")
    match = MatchParams(
        gap_ext=method.get("gap_ext"),
        gap_init=float(method.get("gap_init", 0.0)),
        delta_scale=float(method.get("delta_scale", 1.0)),
    )
    radius = method.get("radius")
    radius = float(radius) if radius is not None else None
    if name == "all-pairs":
        return AllPairs()
    if name == "neighborhood":
        return Neighborhood(radius)
    if name == "edit":
        return EditDistance(match)
    if name == "edit-neighborhood":
        return EditDistanceNeighborhood(match, radius)
    raise _CliError(f"unknown hybrid variant {name!r} in bench config")


def cmd_bench(args) -> int:
    try:
        with open(args.config, encoding="utf-8") as fh:
            config = json.load(fh)
    except OSError as exc:
        raise _CliError(f"cannot read config {args.config!r}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise _CliError(f"malformed bench config: {exc}") from exc

    try:
        scene_entries = config["scenes"]
        seeds = [int(s) for s in config["seeds"]]
        measure_names = config["measures"]
        methods = config["methods"]
    except (KeyError, TypeError, ValueError) as exc:
        raise _CliError(f"malformed bench config: {exc}") from exc
    if not scene_entries or not seeds or not measure_names or not methods:
        raise _CliError("bench config needs scenes, seeds, measures and methods")
    try:
        measures = [parse_measure(n) for n in measure_names]
    except ValueError as exc:
        raise _CliError(f"malformed bench config: {exc}") from exc
    budget_s = config.get("budget_s")
    budget_s = float(budget_s) if budget_s is not None else None

    # cells are independent given (scene, method, seed); rows get sorted
    # afterwards, so running them in parallel would yield the same report
    rows = []
    for entry in scene_entries:
        scene_id = str(entry.get("id", entry.get("builtin", entry.get("file"))))
        scene = _bench_scene(entry)
        for method in methods:
            mname = str(method.get("name", method.get("kind", "prm")))
            for seed in seeds:
                ok, wall, calls, values = _run_bench_cell(
                    scene, method, seed, budget_s, measures)
                for m in measures:
                    key = measure_name(m)
                    rows.append((scene_id, mname, seed, ok,
                                 wall, calls, key,
                                 _fmt(values[key]) if key in values else ""))
    rows.sort(key=lambda r: (r[0], r[1], r[2], r[6]))

    try:
        with open(args.out, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(("scene_id", "method", "seed", "success",
                             "wall_time_s", "local_planner_calls",
                             "measure_name", "value"))
            for r in rows:
                writer.writerow((r[0], r[1], r[2], str(r[3]).lower(),
                                 f"{r[4]:.3f}", r[5], r[6], r[7]))
    except OSError as exc:
        raise _CliError(f"cannot write {args.out!r}: {exc}") from exc
    print(f"bench: {len(rows)} rows -> {args.out}")
    return 0


# ---------------------------------------------------------------- render

def _svg_pts(points, y_top: float) -> str:
    return " ".join(f"{x:.6g},{y_top - y:.6g}" for x, y in points)


def cmd_render(args) -> int:
    scene = _load_scene_ref(args.scene)
    records = _load_records(scene, args.paths)

    x0, y0, x1, y1 = scene.bounds
    w, h = x1 - x0, y1 - y0
    y_top = y1 + y0  # maps scene y up to svg y down within the same box
    stroke = 0.008 * scene.diameter
    marker = 0.012 * scene.diameter

    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'viewBox="{x0:.6g} {y0:.6g} {w:.6g} {h:.6g}" width="800" '
        f'height="{800 * h / w:.6g}">',
        f'<rect x="{x0:.6g}" y="{y0:.6g}" width="{w:.6g}" height="{h:.6g}" '
        f'fill="#fafafa" stroke="#222" stroke-width="{stroke:.6g}"/>',
    ]
    for obs in scene.obstacles:
        lines.append(f'<polygon fill="#5b6770" points="{_svg_pts(obs.vertices, y_top)}"/>')
    for rec, color in zip(records, _PALETTE * (1 + len(records) // len(_PALETTE))):
        pts = [(c.poses[0].x, c.poses[0].y) for c in rec.path.nodes]
        lines.append(f'<polyline fill="none" stroke="{color}" '
                     f'stroke-width="{stroke:.6g}" points="{_svg_pts(pts, y_top)}"/>')
    sx, sy = scene.start.poses[0].x, scene.start.poses[0].y
    gx, gy = scene.goal.poses[0].x, scene.goal.poses[0].y
    lines.append(f'<circle cx="{sx:.6g}" cy="{y_top - sy:.6g}" r="{marker:.6g}" '
                 f'fill="#2ca02c" stroke="#222" stroke-width="{stroke / 2:.6g}"/>')
    lines.append(f'<circle cx="{gx:.6g}" cy="{y_top - gy:.6g}" r="{marker:.6g}" '
                 f'fill="#d62728" stroke="#222" stroke-width="{stroke / 2:.6g}"/>')
    lines.append("</svg>")
    _write_text(args.out, "\n".join(lines) + "\n")
    print(f"render: {len(scene.obstacles)} obstacles, {len(records)} paths -> {args.out}")
    return 0


# ---------------------------------------------------------------- wiring

def _build_parser() -> _Parser:
    parser = _Parser(prog="pathmerge",
                     description="Multi-path motion planning with graph hybridization")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("plan", parents=[], help="plan a single path")
    p.add_argument("--scene", required=True)
    p.add_argument("--planner", choices=("prm", "rrt"), default="prm")
    p.add_argument("--cycles", choices=("none", "all", "useful"), default="none")
    p.add_argument("--gamma", type=float, default=3.0)
    p.add_argument("--samples", type=int, default=500)
    p.add_argument("--neighbors", type=int, default=15)
    p.add_argument("--budget-s", type=float, default=None)
    p.add_argument("--step", type=float, default=None, help="rrt extension step")
    p.add_argument("--goal-bias", type=float, default=0.05)
    p.add_argument("--max-iters", type=int, default=5000)
    p.add_argument("--shortcut-iters", type=int, default=0)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("hybridize", help="merge paths and extract the best route")
    p.add_argument("--scene", required=True)
    p.add_argument("--paths", nargs="+", required=True)
    p.add_argument("--variant", choices=("all-pairs", "neighborhood", "edit",
                                         "edit-neighborhood"),
                   default="edit-neighborhood")
    p.add_argument("--radius", type=float, default=None)
    p.add_argument("--gap-ext", type=float, default=None)
    p.add_argument("--gap-init", type=float, default=0.0)
    p.add_argument("--delta-scale", type=float, default=1.0)
    p.add_argument("--measure", default="length")
    p.add_argument("--k", type=float, default=None)
    p.add_argument("--out", required=True)
    p.add_argument("--graph-out", default=None)
    p.add_argument("--stats", default=None)
    p.set_defaults(func=cmd_hybridize)

    p = sub.add_parser("evaluate", help="evaluate measures on a stored path")
    p.add_argument("--scene", required=True)
    p.add_argument("--path", required=True)
    p.add_argument("--measures", default="length")
    p.add_argument("--csv", default=None)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("bench", help="run a benchmark matrix from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("render", help="render scene and paths to SVG")
    p.add_argument("--scene", required=True)
    p.add_argument("--paths", nargs="*", default=[])
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_render)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except _CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, SceneValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
