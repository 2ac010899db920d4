"""Global trajectory optimization: GP prior + obstacle factors solved by LM."""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .envmap import SignedDistanceField
from .gpmp2_core import GPPriorParams, ObstacleModel
from .optimizer import (
    AnchorFactor,
    FactorGraph,
    GPPriorFactor,
    LMConfig,
    ObstacleFactor,
    OptimizeReport,
    SolverStallError,
    lm_optimize,
)


def init_trajectory(start, goal, params: GPPriorParams) -> np.ndarray:
    """Straight constant-velocity seed, shape ``(num_states, 4)``."""
    start = np.asarray(start, dtype=float)
    goal = np.asarray(goal, dtype=float)
    s = np.linspace(0.0, 1.0, params.num_states)[:, None]
    positions = (1.0 - s) * start + s * goal
    positions[-1] = goal
    velocity = (goal - start) / params.total_time
    return np.hstack([positions, np.broadcast_to(velocity, positions.shape)])


def build_graph(start, goal, sdf, params: GPPriorParams, model: ObstacleModel | None, init=None) -> FactorGraph:
    """Anchors on both ends, a GP prior per consecutive pair, an obstacle factor per interior state.

    ``model=None`` leaves the obstacle factors out.
    """
    traj = init_trajectory(start, goal, params) if init is None else np.asarray(init, dtype=float)
    graph = FactorGraph(list(traj))
    n = params.num_states
    graph.add(AnchorFactor(0, traj[0]))
    graph.add(AnchorFactor(n - 1, traj[-1]))
    for i in range(n - 1):
        graph.add(GPPriorFactor(i, i + 1, params.dt, params.qc))
    if model is not None:
        for i in range(1, n - 1):
            graph.add(ObstacleFactor(i, sdf, model))
    graph.validate()
    return graph


@dataclass
class GPMP2Result:
    path: np.ndarray  # (num_states, 2) positions
    states: np.ndarray  # (num_states, 4)
    report: OptimizeReport
    elapsed_ms: float


def plan_gpmp2(
    start,
    goal,
    sdf: SignedDistanceField,
    params: GPPriorParams | None = None,
    model: ObstacleModel | None = None,
    lm_config: LMConfig | None = None,
) -> GPMP2Result:
    """Optimize a trajectory from ``start`` to ``goal``. The result may collide."""
    params = params or GPPriorParams()
    model = model or ObstacleModel()
    t0 = time.perf_counter()
    graph = build_graph(start, goal, sdf, params, model)
    try:
        report = lm_optimize(graph, lm_config)
    except SolverStallError as exc:
        report = exc.report
        report.converged = False
    elapsed_ms = (time.perf_counter() - t0) * 1e3
    states = np.array(graph.variables)
    path = states[:, :2].copy()
    # Anchors pin the ends only up to their weight; report them exactly.
    path[0], path[-1] = np.asarray(start, dtype=float), np.asarray(goal, dtype=float)
    return GPMP2Result(path, states, report, elapsed_ms)
