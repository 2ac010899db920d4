"""Seeded planner runs, run reports, and multi-seed comparisons."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .envmap import path_in_collision
from .gpmp2_planner import plan_gpmp2
from .hybrid import HybridPlanningError, UnrecoverableWindowError, plan_hybrid
from .metrics import path_length, smoothness
from .rrt_planner import NoPathError, plan_rrt
from .scenario import Environment, ScenarioSpec, load_environment

PLANNERS = ("rrt", "gpmp2", "rrt-gpmp2")
REPORT_SCHEMA_VERSION = 1


@dataclass
class RunReport:
    planner: str
    seed: int
    scenario_hash: str
    timings: dict  # per-phase elapsed ms, always including "total_ms"
    path: list = field(default_factory=list)
    path_length: float | None = None
    smoothness: float | None = None
    collision_audit: bool = False
    failure: str | None = None
    windows: list = field(default_factory=list)
    optimize: dict | None = None
    rrt_iterations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.failure is None

    def to_dict(self) -> dict:
        return {
            "schema_version": REPORT_SCHEMA_VERSION,
            "planner": self.planner,
            "seed": self.seed,
            "scenario_hash": self.scenario_hash,
            "timings": dict(self.timings),
            "path": [[float(x), float(y)] for x, y in self.path],
            "path_length": self.path_length,
            "smoothness": self.smoothness,
            "collision_audit": self.collision_audit,
            "failure": self.failure,
            "windows": list(self.windows),
            "optimize": self.optimize,
            "rrt_iterations": list(self.rrt_iterations),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, data: dict) -> "RunReport":
        return cls(
            planner=data["planner"],
            seed=data["seed"],
            scenario_hash=data["scenario_hash"],
            timings=data["timings"],
            path=[tuple(p) for p in data["path"]],
            path_length=data["path_length"],
            smoothness=data["smoothness"],
            collision_audit=data["collision_audit"],
            failure=data["failure"],
            windows=data.get("windows", []),
            optimize=data.get("optimize"),
            rrt_iterations=data.get("rrt_iterations", []),
        )


@dataclass
class RunArtifacts:
    """Everything a rendering needs beyond the final path."""

    trees: list = field(default_factory=list)  # Tree per RRT invocation
    gpmp2_path: np.ndarray | None = None
    rrt_paths: list = field(default_factory=list)


def run_planner(
    spec: ScenarioSpec, planner: str, seed: int | None = None, env: Environment | None = None
) -> tuple[RunReport, RunArtifacts]:
    """Run one planner on one scenario; planner failures land in ``report.failure``."""
    if planner not in PLANNERS:
        raise ValueError(f"unknown planner {planner!r}; choose from {', '.join(PLANNERS)}")
    env = env or load_environment(spec)
    seed = spec.seed if seed is None else int(seed)
    cfg = spec.rrt_config(seed)
    report = RunReport(planner, seed, spec.content_hash(), timings={"total_ms": 0.0})
    art = RunArtifacts()
    path = None

    if planner == "rrt":
        try:
            res = plan_rrt(env.sdf, spec.start, spec.goal, cfg)
        except NoPathError as exc:
            report.failure = "no-path"
            art.trees.append(exc.tree)
        else:
            path = res.path
            art.trees.append(res.tree)
            art.rrt_paths.append(res.path)
            report.timings = {"rrt_ms": res.elapsed_ms, "total_ms": res.elapsed_ms}
            report.rrt_iterations = [res.iterations]
    elif planner == "gpmp2":
        res = plan_gpmp2(spec.start, spec.goal, env.sdf, spec.prior, spec.obstacle)
        path = res.path
        art.gpmp2_path = res.path
        report.timings = {"gpmp2_ms": res.elapsed_ms, "total_ms": res.elapsed_ms}
        report.optimize = res.report.to_dict()
    else:
        try:
            res = plan_hybrid(spec.start, spec.goal, env.sdf, cfg, spec.prior, spec.obstacle)
        except UnrecoverableWindowError:
            report.failure = "unrecoverable-window"
        except HybridPlanningError as exc:
            report.failure = "no-path"
            if exc.gpmp2 is not None:
                art.gpmp2_path = exc.gpmp2.path
                report.optimize = exc.gpmp2.report.to_dict()
            report.windows = [w.to_dict() for w in exc.windows]
            art.trees = [r.tree for r in exc.local] + ([exc.tree] if exc.tree is not None else [])
        else:
            rep = res.report
            path = res.path
            art.gpmp2_path = rep.gpmp2.path
            art.trees = [r.tree for r in rep.local]
            art.rrt_paths = [r.path for r in rep.local]
            report.timings = {"gpmp2_ms": rep.gpmp2_ms, "rrt_ms": rep.rrt_ms, "total_ms": rep.total_ms}
            report.windows = [w.to_dict() for w in rep.windows]
            report.optimize = rep.gpmp2.report.to_dict()
            report.rrt_iterations = [r.iterations for r in rep.local]

    if path is not None:
        report.path = [tuple(map(float, p)) for p in path]
        report.path_length = path_length(path)
        report.smoothness = smoothness(path)
        # Audited against the field independently of whatever the planner believed.
        report.collision_audit = not path_in_collision(env.sdf, path, spec.clearance)
    return report, art


def parse_seeds(text: str) -> list[int]:
    """``"0..19"`` (inclusive range), ``"1,4,9"``, or a single integer."""
    out = []
    for part in str(text).split(","):
        part = part.strip()
        if ".." in part:
            lo, hi = part.split("..", 1)
            lo, hi = int(lo), int(hi)
            if hi < lo:
                raise ValueError(f"empty seed range {part!r}")
            out.extend(range(lo, hi + 1))
        elif part:
            out.append(int(part))
    if not out:
        raise ValueError("no seeds given")
    return out


def _median(values):
    return float(np.median(values)) if values else None


def summarize(rows: list[dict]) -> dict:
    ok = [r for r in rows if r["failure"] is None]
    return {
        "runs": len(rows),
        "successes": len(ok),
        "median_total_ms": _median([r["total_ms"] for r in ok]),
        "median_gpmp2_ms": _median([r["gpmp2_ms"] for r in ok if r.get("gpmp2_ms") is not None]),
        "median_path_length": _median([r["path_length"] for r in ok]),
        "median_smoothness": _median([r["smoothness"] for r in ok]),
        "collision_free_fraction": (sum(r["collision_audit"] for r in ok) / len(ok)) if ok else None,
    }


def compare(spec: ScenarioSpec, planners, seeds, env: Environment | None = None, on_run=None) -> dict:
    """Run every (planner, seed) cell and report per-planner medians plus ratios to the first planner.

    ``on_run(report, artifacts)`` is called after each run, e.g. to keep paths or trees.
    """
    planners = list(planners)
    for p in planners:
        if p not in PLANNERS:
            raise ValueError(f"unknown planner {p!r}")
    env = env or load_environment(spec)
    rows = {p: [] for p in planners}
    for p in planners:
        for seed in seeds:
            rep, art = run_planner(spec, p, seed, env)
            if on_run is not None:
                on_run(rep, art)
            rows[p].append(
                {
                    "seed": seed,
                    "total_ms": rep.timings["total_ms"],
                    "gpmp2_ms": rep.timings.get("gpmp2_ms"),
                    "path_length": rep.path_length,
                    "smoothness": rep.smoothness,
                    "collision_audit": rep.collision_audit,
                    "failure": rep.failure,
                }
            )
    summary = {p: summarize(rows[p]) for p in planners}
    base = summary[planners[0]]
    ratios = {}
    for p in planners[1:]:
        s = summary[p]
        r = {}
        for key, num, den in (
            ("time_ratio", s["median_total_ms"], base["median_total_ms"]),
            ("length_ratio", s["median_path_length"], base["median_path_length"]),
            ("smoothness_ratio", s["median_smoothness"], base["median_smoothness"]),
        ):
            r[key] = num / den if num is not None and den else None
        if s["median_gpmp2_ms"] is not None and s["median_total_ms"]:
            r["gpmp2_share"] = s["median_gpmp2_ms"] / s["median_total_ms"]
        ratios[f"{p}/{planners[0]}"] = r
    return {
        "schema_version": REPORT_SCHEMA_VERSION,
        "scenario_hash": spec.content_hash(),
        "seeds": list(seeds),
        "planners": planners,
        "summary": summary,
        "ratios": ratios,
        "runs": rows,
    }

