"""Command-line entry point: ``plan``, ``compare``, ``gen-maze``, ``follow``.

Exit codes: 0 success, 1 planner or follower failure (report still written),
2 usage or input error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .bench import PLANNERS, RunReport, compare, parse_seeds, run_planner
from .envmap import BENCHMARK_ENDPOINTS, gen_benchmark_maze, load_map, save_map
from .follow_sim import FollowConfig, FollowDivergenceError, random_start_near, simulate_follow
from .render import render_follow, render_run
from .scenario import ScenarioError, load_environment, load_scenario


def _write(path, text: str) -> None:
    Path(path).write_text(text)


def cmd_plan(args) -> int:
    spec = load_scenario(args.scenario)
    env = load_environment(spec)
    report, art = run_planner(spec, args.planner, args.seed, env)
    _write(args.out, report.to_json())
    if args.svg:
        _write(
            args.svg,
            render_run(
                env.grid,
                spec.start,
                spec.goal,
                trees=art.trees,
                gpmp2_path=art.gpmp2_path,
                rrt_paths=art.rrt_paths,
                final_path=np.asarray(report.path) if report.path else None,
                title=f"{report.planner} seed {report.seed}",
            ),
        )
    if report.failure:
        print(f"{args.planner}: failed ({report.failure})", file=sys.stderr)
        return 1
    print(
        f"{args.planner}: {report.timings['total_ms']:.1f} ms, length {report.path_length:.1f} m, "
        f"smoothness {report.smoothness:.3f} rad, collision-free {report.collision_audit}"
    )
    return 0


def cmd_compare(args) -> int:
    spec = load_scenario(args.scenario)
    planners = [p.strip() for p in args.planners.split(",") if p.strip()]
    unknown = [p for p in planners if p not in PLANNERS]
    if unknown or not planners:
        raise ScenarioError(f"unknown planners {unknown}; choose from {', '.join(PLANNERS)}")
    result = compare(spec, planners, parse_seeds(args.seeds))
    text = json.dumps(result, indent=2, sort_keys=True) + "\n"
    if args.out:
        _write(args.out, text)
    for p, s in result["summary"].items():
        print(
            f"{p:>10}: {s['successes']}/{s['runs']} ok, median {s['median_total_ms']} ms, "
            f"length {s['median_path_length']} m, smoothness {s['median_smoothness']}"
        )
    for k, r in result["ratios"].items():
        print(f"{k}: " + ", ".join(f"{n} {v:.3f}" for n, v in r.items() if v is not None))
    return 0


def cmd_gen_maze(args) -> int:
    grid = gen_benchmark_maze(args.id)
    save_map(grid, args.out)
    if args.svg:
        start, goal = BENCHMARK_ENDPOINTS[args.id]
        _write(args.svg, render_run(grid, start, goal, title=f"maze {args.id}"))
    print(f"wrote {args.out} ({grid.width}x{grid.height} cells, {grid.resolution} m/cell)")
    return 0


def cmd_follow(args) -> int:
    report = RunReport.from_dict(json.loads(Path(args.report).read_text()))
    if len(report.path) < 2:
        raise ScenarioError(f"report {args.report} has no path to follow")
    path = np.asarray(report.path, dtype=float)
    if args.reverse:
        path = path[::-1]
    config = FollowConfig(lookahead=args.lookahead)
    initial = None
    if args.init_radius > 0:
        initial = random_start_near(path[0], args.init_radius, np.random.default_rng(args.seed))
    status = 0
    try:
        trace = simulate_follow(path, config, initial)
    except FollowDivergenceError as exc:
        trace, status = exc.trace, 1
        print(f"follow: diverged ({exc})", file=sys.stderr)
    if not trace.reached and status == 0:
        print("follow: time budget exhausted before reaching the goal", file=sys.stderr)
        status = 1
    _write(args.out, trace.to_json())
    if args.svg:
        grid = None
        if args.map:
            grid = load_map(args.map)
        elif args.maze:
            grid = gen_benchmark_maze(args.maze)
        _write(args.svg, render_follow(grid, path, trace.positions, title="desired vs real"))
    print(
        f"follow: reached {trace.reached} after {trace.times[-1]:.1f} s, max cross-track "
        f"{trace.max_cross_track:.2f} m, after capture {trace.tracking_error():.2f} m"
    )
    return status


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mazeplan", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("plan", help="run one planner on a scenario")
    p.add_argument("--scenario", required=True)
    p.add_argument("--planner", choices=PLANNERS, default="rrt-gpmp2")
    p.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    p.add_argument("--out", required=True, help="RunReport JSON path")
    p.add_argument("--svg", help="optional SVG rendering path")
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("compare", help="run planners over a seed range and aggregate")
    p.add_argument("--scenario", required=True)
    p.add_argument("--planners", "--planner", dest="planners", default="rrt,rrt-gpmp2",
                   help="comma list; ratios are taken against the first")
    p.add_argument("--seeds", default="0..19", help='e.g. "0..19" or "1,5,9"')
    p.add_argument("--out", help="aggregate JSON path")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("gen-maze", help="write a benchmark maze as a graymap")
    p.add_argument("--id", type=int, choices=(1, 2), required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--svg")
    p.set_defaults(func=cmd_gen_maze)

    p = sub.add_parser("follow", help="track a RunReport path with the PID vehicle")
    p.add_argument("--report", required=True)
    p.add_argument("--out", required=True, help="Trace JSON path")
    p.add_argument("--svg")
    p.add_argument("--reverse", action="store_true", help="drive the path from its end to its start")
    p.add_argument("--lookahead", type=float, default=FollowConfig.lookahead)
    p.add_argument("--init-radius", type=float, default=0.0, help="random start within this distance")
    p.add_argument("--seed", type=int, default=0)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--map", help="graymap drawn under the SVG")
    g.add_argument("--maze", type=int, choices=(1, 2), help="builtin maze drawn under the SVG")
    p.set_defaults(func=cmd_follow)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:  # scenario, map, and seed errors are ValueErrors
        print(f"mazeplan {args.command}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
