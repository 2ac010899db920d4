"""Run the planner comparison on both benchmark mazes and write JSON and SVG results.

    python3 scripts/run_benchmark.py --seeds 0..19 --out results/
"""

import argparse
import json
from pathlib import Path

import numpy as np

from mazeplan.bench import compare, parse_seeds
from mazeplan.render import render_run
from mazeplan.scenario import load_environment, load_scenario

ROOT = Path(__file__).resolve().parents[1]


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--seeds", default="0..19")
    parser.add_argument("--planners", default="rrt,rrt-gpmp2")
    parser.add_argument("--out", default="results")
    args = parser.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    planners = args.planners.split(",")

    for maze in (1, 2):
        spec = load_scenario(ROOT / "scenarios" / f"maze{maze}.json")
        env = load_environment(spec)
        first = {}

        def keep(rep, art):
            # one drawing per planner: its first seed
            first.setdefault(rep.planner, (rep, art))

        result = compare(spec, planners, parse_seeds(args.seeds), env, on_run=keep)
        (out / f"maze{maze}_compare.json").write_text(json.dumps(result, indent=2, sort_keys=True) + "\n")
        for planner, (rep, art) in first.items():
            svg = render_run(env.grid, spec.start, spec.goal, art.trees, art.gpmp2_path, art.rrt_paths,
                             np.asarray(rep.path) if rep.path else None, f"maze {maze}: {planner} seed {rep.seed}")
            (out / f"maze{maze}_{planner}.svg").write_text(svg)

        print(f"maze {maze}")
        for p, s in result["summary"].items():
            print(f"  {p:>10}: {s['successes']}/{s['runs']} ok, median {s['median_total_ms']:.1f} ms, "
                  f"length {s['median_path_length']:.1f} m, smoothness {s['median_smoothness']:.3f} rad")
        for k, r in result["ratios"].items():
            print(f"  {k}: " + ", ".join(f"{n} {v:.3f}" for n, v in r.items() if v is not None))


if __name__ == "__main__":
    main()
