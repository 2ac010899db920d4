"""Global GPMP2 plan repaired by local RRT re-planning over its colliding stretches."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import numpy as np

from .envmap import SignedDistanceField, path_in_collision, segment_in_collision, signed_distance
from .gpmp2_core import GPPriorParams, ObstacleModel
from .gpmp2_planner import GPMP2Result, plan_gpmp2
from .optimizer import LMConfig
from .rrt_planner import NoPathError, RRTConfig, RRTResult, plan_rrt


class UnrecoverableWindowError(RuntimeError):
    """A colliding stretch touches the first or last waypoint."""


class HybridPlanningError(RuntimeError):
    def __init__(self, message, gpmp2=None, windows=None, local=None, tree=None):
        super().__init__(message)
        self.gpmp2 = gpmp2
        self.windows = windows or []
        self.local = local or []
        self.tree = tree


@dataclass(frozen=True)
class CollisionWindow:
    a_index: int
    b_index: int
    a: tuple[float, float]
    b: tuple[float, float]

    def to_dict(self) -> dict:
        return {"a_index": self.a_index, "b_index": self.b_index, "a": list(self.a), "b": list(self.b)}


def collision_flags(path, sdf: SignedDistanceField, clearance: float = 0.0):
    """Per-waypoint and per-segment collision flags."""
    path = np.asarray(path, dtype=float)
    waypoint = np.array([signed_distance(sdf, p) < clearance for p in path])
    segment = np.array([segment_in_collision(sdf, path[i], path[i + 1], clearance) for i in range(len(path) - 1)])
    return waypoint, segment


def find_collision_windows(path, sdf: SignedDistanceField, clearance: float = 0.0) -> list[CollisionWindow]:
    """Maximal colliding stretches of the path, bracketed by free waypoints.

    Waypoints and segments alternate ``w0 s0 w1 s1 ... wN``; a window is a
    maximal run of colliding elements, with ``a``/``b`` the free waypoints on
    either side of it.
    """
    path = np.asarray(path, dtype=float)
    if len(path) < 2:
        raise ValueError("path needs at least two waypoints")
    waypoint, segment = collision_flags(path, sdf, clearance)
    n = len(path)
    if waypoint[0] or waypoint[-1]:
        raise UnrecoverableWindowError("colliding stretch reaches a path endpoint")
    elements = np.empty(2 * n - 1, dtype=bool)
    elements[0::2] = waypoint
    elements[1::2] = segment
    windows = []
    k = 0
    while k < len(elements):
        if not elements[k]:
            k += 1
            continue
        start = k
        while elements[k]:
            k += 1
        # Runs cannot touch the (free) endpoint waypoints, so both brackets exist.
        a, b = (start - 1) // 2, k // 2
        windows.append(CollisionWindow(a, b, tuple(path[a]), tuple(path[b])))
    return windows


def integrate(global_path, windows, local_paths) -> np.ndarray:
    """Splice each local path in place of its window, dropping repeated junctions."""
    global_path = np.asarray(global_path, dtype=float)
    pieces = []
    cursor = 0
    for w, local in zip(windows, local_paths):
        pieces.append(global_path[cursor : w.a_index + 1])
        pieces.append(np.asarray(local, dtype=float))
        cursor = w.b_index
    pieces.append(global_path[cursor:])
    out = []
    for piece in pieces:
        for p in piece:
            if out and np.array_equal(out[-1], p):
                continue
            out.append(p)
    return np.array(out)


@dataclass
class HybridReport:
    gpmp2_ms: float
    rrt_ms: float
    windows: list
    collision_audit: bool
    gpmp2: GPMP2Result
    local: list = field(default_factory=list)  # RRTResult per window

    @property
    def total_ms(self) -> float:
        return self.gpmp2_ms + self.rrt_ms


@dataclass
class HybridResult:
    path: np.ndarray
    report: HybridReport


def window_seed(seed: int, index: int) -> int:
    return int(np.random.SeedSequence([int(seed) % 2**64, index]).generate_state(1, np.uint64)[0])


def plan_hybrid(
    start,
    goal,
    sdf: SignedDistanceField,
    rrt_config: RRTConfig | None = None,
    params: GPPriorParams | None = None,
    model: ObstacleModel | None = None,
    lm_config: LMConfig | None = None,
) -> HybridResult:
    rrt_config = rrt_config or RRTConfig()
    clearance = rrt_config.clearance
    gp = plan_gpmp2(start, goal, sdf, params, model, lm_config)
    global_path = gp.path

    windows = find_collision_windows(global_path, sdf, clearance)
    local: list[RRTResult] = []
    for k, w in enumerate(windows):
        # Only the first window keeps the user's seed so single-window runs match a plain RRT call.
        seed = rrt_config.rng_seed if k == 0 else window_seed(rrt_config.rng_seed, k)
        cfg = dataclasses.replace(rrt_config, rng_seed=seed)
        try:
            local.append(plan_rrt(sdf, w.a, w.b, cfg))
        except NoPathError as exc:
            raise HybridPlanningError(
                f"local re-plan failed for window {k}", gpmp2=gp, windows=windows, local=local, tree=exc.tree
            ) from exc

    path = integrate(global_path, windows, [r.path for r in local])
    audit = not path_in_collision(sdf, path, clearance)
    report = HybridReport(
        gpmp2_ms=gp.elapsed_ms,
        rrt_ms=sum(r.elapsed_ms for r in local),
        windows=windows,
        collision_audit=audit,
        gpmp2=gp,
        local=local,
    )
    return HybridResult(path, report)
