"""Rapidly-exploring random tree over a signed distance field."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .envmap import SignedDistanceField, _interp_scalar, segment_in_collision, signed_distance


class NoPathError(RuntimeError):
    def __init__(self, message, tree):
        super().__init__(message)
        self.tree = tree


@dataclass(frozen=True)
class RRTConfig:
    step_length: float = 10.0
    max_iters: int = 100_000
    goal_tolerance: float = 10.0
    goal_bias: float = 0.05
    clearance: float = 0.0
    rng_seed: int = 0

    def __post_init__(self):
        if not self.step_length > 0:
            raise ValueError("step_length must be positive")
        if not 0 <= self.goal_bias < 1:
            raise ValueError("goal_bias must be in [0, 1)")
        if self.goal_tolerance < 0 or self.clearance < 0:
            raise ValueError("goal_tolerance and clearance must be non-negative")
        if self.max_iters < 1:
            raise ValueError("max_iters must be positive")


@dataclass
class Tree:
    vertices: list = field(default_factory=list)  # (x, y) tuples
    parents: list = field(default_factory=list)  # -1 for the root

    @property
    def edges(self) -> list[tuple[int, int]]:
        return [(p, i) for i, p in enumerate(self.parents) if p >= 0]

    def chain(self, index: int) -> np.ndarray:
        out = []
        while index >= 0:
            out.append(self.vertices[index])
            index = self.parents[index]
        return np.array(out[::-1], dtype=float)


@dataclass
class RRTResult:
    path: np.ndarray
    tree: Tree
    elapsed_ms: float
    iterations: int


def steer(x_nearest, x_rand, step: float):
    if not step > 0:
        raise ValueError("step must be positive")
    dx = x_rand[0] - x_nearest[0]
    dy = x_rand[1] - x_nearest[1]
    dist = math.hypot(dx, dy)
    if dist <= step:
        return (float(x_rand[0]), float(x_rand[1]))
    s = step / dist
    return (x_nearest[0] + s * dx, x_nearest[1] + s * dy)


def nearest(vertices, x_rand) -> int:
    """Index of the closest vertex; lowest index wins ties."""
    pts = np.asarray(vertices, dtype=float)
    d2 = (pts[:, 0] - x_rand[0]) ** 2 + (pts[:, 1] - x_rand[1]) ** 2
    return int(np.argmin(d2))


def make_rng(seed: int) -> np.random.Generator:
    # Philox is counter-based: one independent stream per seed.
    return np.random.Generator(np.random.Philox(int(seed) % 2**64))


def plan_rrt(sdf: SignedDistanceField, x_start, x_goal, config: RRTConfig | None = None) -> RRTResult:
    config = config or RRTConfig()
    t0 = time.perf_counter()
    start = (float(x_start[0]), float(x_start[1]))
    goal = (float(x_goal[0]), float(x_goal[1]))
    clearance = config.clearance
    for name, p in (("start", start), ("goal", goal)):
        if signed_distance(sdf, p) < clearance:
            raise ValueError(f"{name} {p} is not collision-free")

    rng = make_rng(config.rng_seed)
    xmax, ymax = sdf.extent
    step, tol = config.step_length, config.goal_tolerance
    tree = Tree([start], [-1])
    # Preallocated coordinate buffer for the nearest-vertex scan.
    buf = np.empty((config.max_iters + 2, 2))
    buf[0] = start
    count = 1

    def reached(idx, p):
        """Index of the goal vertex if ``p`` connects to the goal, else None."""
        if math.dist(p, goal) > tol or segment_in_collision(sdf, p, goal, clearance):
            return None
        if p == goal:
            return idx
        tree.vertices.append(goal)
        tree.parents.append(idx)
        return len(tree.vertices) - 1

    goal_index = reached(0, start)
    it = 0
    while goal_index is None and it < config.max_iters:
        it += 1
        if rng.random() < config.goal_bias:
            x_rand = goal
        else:
            while True:
                u = rng.random(2)
                x_rand = (u[0] * xmax, u[1] * ymax)
                if _interp_scalar(sdf, x_rand[0], x_rand[1]) >= clearance:
                    break
        pts = buf[:count]
        d2 = (pts[:, 0] - x_rand[0]) ** 2 + (pts[:, 1] - x_rand[1]) ** 2
        i_near = int(np.argmin(d2))
        x_near = tree.vertices[i_near]
        x_new = steer(x_near, x_rand, step)
        if x_new == x_near or segment_in_collision(sdf, x_near, x_new, clearance):
            continue
        tree.vertices.append(x_new)
        tree.parents.append(i_near)
        buf[count] = x_new
        count += 1
        goal_index = reached(count - 1, x_new)

    elapsed_ms = (time.perf_counter() - t0) * 1e3
    if goal_index is None:
        raise NoPathError(f"no path after {config.max_iters} iterations", tree)
    return RRTResult(tree.chain(goal_index), tree, elapsed_ms, it)
