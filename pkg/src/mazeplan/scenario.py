"""Scenario files: the map, endpoints, and every planner parameter for one benchmark problem.

A scenario is JSON with a ``schema_version`` field::

    {
      "schema_version": 1,
      "map": {"builtin": 1},            # or {"file": "maze.pgm"}, relative to the scenario
      "resolution": 1.0,
      "start": [400, 400], "goal": [400, 100],
      "gpmp2": {"num_states": 31, "total_time": 100, "qc": 1, "epsilon": 8, "sigma_obs": 0.5},
      "rrt": {"step_length": 10, "max_iters": 100000, "goal_tolerance": 10, "goal_bias": 0.05},
      "clearance": 0.0,
      "seed": 0
    }

Missing ``gpmp2``/``rrt`` keys take the library defaults.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .envmap import OccupancyGrid, SignedDistanceField, build_sdf, gen_benchmark_maze, load_map, signed_distance
from .gpmp2_core import GPPriorParams, ObstacleModel
from .rrt_planner import RRTConfig

SCHEMA_VERSION = 1

_GPMP2_KEYS = {"num_states", "total_time", "qc", "epsilon", "sigma_obs"}
_RRT_KEYS = {"step_length", "max_iters", "goal_tolerance", "goal_bias"}


class ScenarioError(ValueError):
    pass


@dataclass(frozen=True)
class ScenarioSpec:
    start: tuple[float, float]
    goal: tuple[float, float]
    maze_id: int | None = None
    map_file: str | None = None
    resolution: float = 1.0
    prior: GPPriorParams = field(default_factory=GPPriorParams)
    obstacle: ObstacleModel = field(default_factory=ObstacleModel)
    rrt: RRTConfig = field(default_factory=RRTConfig)
    clearance: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if (self.maze_id is None) == (self.map_file is None):
            raise ScenarioError("give exactly one of a builtin maze id or a map file")
        if not self.resolution > 0:
            raise ScenarioError("resolution must be positive")
        if self.clearance < 0:
            raise ScenarioError("clearance must be non-negative")
        for name in ("start", "goal"):
            p = getattr(self, name)
            if len(p) != 2 or not np.all(np.isfinite(p)):
                raise ScenarioError(f"{name} must be a finite 2-D point")
        if tuple(self.start) == tuple(self.goal):
            raise ScenarioError("start and goal coincide")

    def rrt_config(self, seed: int | None = None) -> RRTConfig:
        """The RRT settings with the scenario clearance and the given (or scenario) seed."""
        return dataclasses.replace(
            self.rrt, clearance=self.clearance, rng_seed=self.seed if seed is None else int(seed)
        )

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "map": {"builtin": self.maze_id} if self.maze_id is not None else {"file": self.map_file},
            "resolution": self.resolution,
            "start": list(self.start),
            "goal": list(self.goal),
            "gpmp2": {
                "num_states": self.prior.num_states,
                "total_time": self.prior.total_time,
                "qc": self.prior.qc,
                "epsilon": self.obstacle.epsilon,
                "sigma_obs": self.obstacle.sigma_obs,
            },
            "rrt": {k: getattr(self.rrt, k) for k in sorted(_RRT_KEYS)},
            "clearance": self.clearance,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, data: dict, base_dir: str | Path | None = None) -> "ScenarioSpec":
        version = data.get("schema_version")
        if version != SCHEMA_VERSION:
            raise ScenarioError(f"unsupported schema_version {version!r}; expected {SCHEMA_VERSION}")
        source = data.get("map") or {}
        maze_id, map_file = source.get("builtin"), source.get("file")
        if map_file is not None and base_dir is not None and not Path(map_file).is_absolute():
            map_file = str(Path(base_dir) / map_file)
        gp = dict(data.get("gpmp2") or {})
        rrt = dict(data.get("rrt") or {})
        for section, got, allowed in (("gpmp2", gp, _GPMP2_KEYS), ("rrt", rrt, _RRT_KEYS)):
            unknown = set(got) - allowed
            if unknown:
                raise ScenarioError(f"unknown {section} keys: {sorted(unknown)}")
        try:
            prior = GPPriorParams(
                **{k: gp[k] for k in ("qc", "total_time", "num_states") if k in gp}
            )
            obstacle = ObstacleModel(**{k: gp[k] for k in ("epsilon", "sigma_obs") if k in gp})
            rrt_config = RRTConfig(**rrt)
            return cls(
                start=tuple(float(v) for v in data["start"]),
                goal=tuple(float(v) for v in data["goal"]),
                maze_id=None if maze_id is None else int(maze_id),
                map_file=map_file,
                resolution=float(data.get("resolution", 1.0)),
                prior=prior,
                obstacle=obstacle,
                rrt=rrt_config,
                clearance=float(data.get("clearance", 0.0)),
                seed=int(data.get("seed", 0)),
            )
        except KeyError as exc:
            raise ScenarioError(f"missing scenario field {exc}") from None
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ScenarioError):
                raise
            raise ScenarioError(str(exc)) from None

    def content_hash(self) -> str:
        """SHA-256 of the canonical JSON form; identifies the problem in reports."""
        canonical = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode()).hexdigest()


def load_scenario(path) -> ScenarioSpec:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}: {exc}") from None
    return ScenarioSpec.from_dict(data, base_dir=path.parent)


def save_scenario(spec: ScenarioSpec, path) -> None:
    Path(path).write_text(json.dumps(spec.to_dict(), indent=2) + "\n")


@dataclass(frozen=True)
class Environment:
    grid: OccupancyGrid
    sdf: SignedDistanceField


def load_environment(spec: ScenarioSpec) -> Environment:
    """Build the grid and field for a scenario and check both endpoints are free."""
    if spec.maze_id is not None:
        try:
            grid = gen_benchmark_maze(spec.maze_id)
        except ValueError as exc:
            raise ScenarioError(str(exc)) from None
        if spec.resolution != grid.resolution:
            grid = OccupancyGrid(np.array(grid.cells), spec.resolution)
    else:
        grid = load_map(spec.map_file, spec.resolution)
    sdf = build_sdf(grid)
    for name in ("start", "goal"):
        p = getattr(spec, name)
        if signed_distance(sdf, p) < spec.clearance:
            raise ScenarioError(f"{name} {p} is not in free space")
    return Environment(grid, sdf)
