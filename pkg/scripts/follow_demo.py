"""Plan maze 1 with the hybrid planner, then drive it from (400, 100) to (400, 400).

    python3 scripts/follow_demo.py --seed 0 --out results/
"""

import argparse
from pathlib import Path

import numpy as np

from mazeplan.bench import run_planner
from mazeplan.follow_sim import FollowConfig, random_start_near, simulate_follow
from mazeplan.render import render_follow
from mazeplan.scenario import load_environment, load_scenario

ROOT = Path(__file__).resolve().parents[1]


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--init-radius", type=float, default=20.0)
    parser.add_argument("--lookahead", type=float, default=FollowConfig.lookahead)
    parser.add_argument("--out", default="results")
    args = parser.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    spec = load_scenario(ROOT / "scenarios" / "maze1.json")
    env = load_environment(spec)
    report, _ = run_planner(spec, "rrt-gpmp2", args.seed, env)
    if not report.ok:
        raise SystemExit(f"planning failed: {report.failure}")
    path = np.asarray(report.path)[::-1]
    rng = np.random.default_rng(args.seed)
    start = random_start_near(path[0], args.init_radius, rng)
    trace = simulate_follow(path, FollowConfig(lookahead=args.lookahead), start)

    (out / "follow_trace.json").write_text(trace.to_json())
    (out / "follow.svg").write_text(render_follow(env.grid, path, trace.positions, "desired vs real"))
    print(f"reached {trace.reached} in {trace.times[-1]:.1f} s; max cross-track {trace.max_cross_track:.2f} m, "
          f"after capture {trace.tracking_error():.2f} m")


if __name__ == "__main__":
    main()
