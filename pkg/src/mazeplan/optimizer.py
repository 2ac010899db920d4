"""Factor graph container and batch Levenberg-Marquardt.

Each factor exposes a whitened residual and its Jacobian blocks with respect
to the variables it touches; the solver only ever sees those.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy import linalg

from .envmap import SignedDistanceField
from .gpmp2_core import ObstacleModel, obstacle_error, process_noise_cov, transition, whitener

ANCHOR_WEIGHT = 1e6
LAMBDA_MIN = 1e-12
LAMBDA_MAX = 1e10


class SolverStallError(RuntimeError):
    """Damping escalated past LAMBDA_MAX; ``values`` holds the best state found."""

    def __init__(self, message, values, report):
        super().__init__(message)
        self.values = values
        self.report = report


class Factor:
    kind = "custom"

    def __init__(self, keys):
        self.keys = tuple(int(k) for k in keys)

    def linearize(self, values):
        """Return ``(whitened residual, [jacobian block per key])``."""
        raise NotImplementedError

    def error(self, values) -> np.ndarray:
        return self.linearize(values)[0]


class AnchorFactor(Factor):
    """Pins one variable to ``target``: residual ``sqrt_info @ (x - target)``."""

    kind = "anchor"

    def __init__(self, key, target, weight=ANCHOR_WEIGHT, sqrt_info=None):
        super().__init__([key])
        self.target = np.atleast_1d(np.asarray(target, dtype=float))
        n = len(self.target)
        self.sqrt_info = weight * np.eye(n) if sqrt_info is None else np.asarray(sqrt_info, dtype=float)

    def error(self, values):
        return self.sqrt_info @ (values[self.keys[0]] - self.target)

    def linearize(self, values):
        return self.error(values), [self.sqrt_info]


class GPPriorFactor(Factor):
    kind = "gp_prior"

    def __init__(self, key_i, key_next, dt, qc):
        if key_next != key_i + 1:
            raise ValueError("gp_prior factors join adjacent variables")
        super().__init__([key_i, key_next])
        self.dt = dt
        self.qc = qc
        self.phi = transition(dt)
        self.sqrt_info = whitener(process_noise_cov(dt, qc))
        self._jac_i = self.sqrt_info @ self.phi

    def error(self, values):
        i, j = self.keys
        return self.sqrt_info @ (self.phi @ values[i] - values[j])

    def linearize(self, values):
        return self.error(values), [self._jac_i, -self.sqrt_info]


class ObstacleFactor(Factor):
    kind = "obstacle"

    def __init__(self, key, sdf: SignedDistanceField, model: ObstacleModel):
        super().__init__([key])
        self.sdf = sdf
        self.model = model

    def error(self, values):
        r, _ = obstacle_error(values[self.keys[0]], self.sdf, self.model)
        return np.array([r])

    def linearize(self, values):
        r, grad = obstacle_error(values[self.keys[0]], self.sdf, self.model)
        return np.array([r]), [grad[None, :]]


@dataclass
class FactorGraph:
    variables: list = field(default_factory=list)
    factors: list = field(default_factory=list)

    def __post_init__(self):
        self.variables = [np.atleast_1d(np.asarray(v, dtype=float)).copy() for v in self.variables]

    def add(self, factor: Factor) -> None:
        self.factors.append(factor)

    @property
    def dims(self) -> list[int]:
        return [len(v) for v in self.variables]

    def offsets(self) -> np.ndarray:
        return np.concatenate([[0], np.cumsum(self.dims)]).astype(int)

    def validate(self, require_anchors: bool = True) -> None:
        n = len(self.variables)
        for f in self.factors:
            if any(k < 0 or k >= n for k in f.keys):
                raise ValueError(f"{f.kind} factor references missing variable in {f.keys}")
        if require_anchors:
            for end in (0, n - 1):
                count = sum(1 for f in self.factors if f.kind == "anchor" and f.keys == (end,))
                if count != 1:
                    raise ValueError(f"expected exactly one anchor on variable {end}, found {count}")

    def stacked(self) -> np.ndarray:
        return np.concatenate(self.variables)

    def unstack(self, x) -> list:
        off = self.offsets()
        return [np.array(x[off[i] : off[i + 1]]) for i in range(len(self.variables))]


def total_cost(graph: FactorGraph, values=None) -> float:
    values = graph.variables if values is None else values
    return 0.5 * sum(float(np.dot(e, e)) for e in (f.error(values) for f in graph.factors))


def _pattern(graph: FactorGraph):
    """Row/column indices of every Jacobian-product block, cached per graph structure."""
    key = (tuple(graph.dims), tuple(f.keys for f in graph.factors))
    cached = getattr(graph, "_pattern_cache", None)
    if cached is not None and cached[0] == key:
        return cached[1]
    off = graph.offsets()
    rows, cols = [], []
    for f in graph.factors:
        for ka in f.keys:
            for kb in f.keys:
                ii, jj = np.meshgrid(
                    np.arange(off[ka], off[ka + 1]), np.arange(off[kb], off[kb + 1]), indexing="ij"
                )
                rows.append(ii.ravel())
                cols.append(jj.ravel())
    pattern = (
        np.concatenate(rows) if rows else np.zeros(0, int),
        np.concatenate(cols) if cols else np.zeros(0, int),
    )
    graph._pattern_cache = (key, pattern)
    return pattern


def _assemble(graph: FactorGraph, values):
    off = graph.offsets()
    n = int(off[-1])
    data = []
    g = np.zeros(n)
    for f in graph.factors:
        r, blocks = f.linearize(values)
        for a, ka in enumerate(f.keys):
            ja_t = blocks[a].T
            g[off[ka] : off[ka + 1]] += ja_t @ r
            for b in range(len(f.keys)):
                data.append((ja_t @ blocks[b]).ravel())
    return (np.concatenate(data) if data else np.zeros(0)), g


def linearize(graph: FactorGraph, values=None):
    """Gauss-Newton system ``(J^T J, J^T r)`` as (sparse CSR, dense vector)."""
    values = graph.variables if values is None else values
    rows, cols = _pattern(graph)
    data, g = _assemble(graph, values)
    n = len(g)
    return sp.csr_matrix((data, (rows, cols)), shape=(n, n)), g


def _banded(graph: FactorGraph, data, n):
    """Upper banded storage of the summed blocks, for ``solveh_banded``."""
    rows, cols = _pattern(graph)
    upper = cols >= rows
    bw = int(np.max(cols - rows, initial=0))
    ab = np.zeros((bw + 1, n))
    np.add.at(ab, (bw + rows[upper] - cols[upper], cols[upper]), data[upper])
    return ab


@dataclass(frozen=True)
class LMConfig:
    lambda_init: float = 1e-4
    lambda_up: float = 10.0
    lambda_down: float = 0.1
    max_iters: int = 100
    rel_cost_tol: float = 1e-6
    abs_grad_tol: float = 1e-8

    def __post_init__(self):
        for name in ("lambda_init", "lambda_up", "lambda_down", "max_iters", "rel_cost_tol", "abs_grad_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not self.lambda_down < 1 < self.lambda_up:
            raise ValueError("need lambda_down < 1 < lambda_up")


@dataclass
class OptimizeReport:
    iterations: int = 0
    accepted_steps: int = 0
    initial_cost: float = 0.0
    final_cost: float = 0.0
    converged: bool = False
    reason: str = ""
    cost_history: list = field(default_factory=list)
    lambda_history: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "iterations": self.iterations,
            "accepted_steps": self.accepted_steps,
            "initial_cost": self.initial_cost,
            "final_cost": self.final_cost,
            "converged": self.converged,
            "reason": self.reason,
        }


def _solve(ab, g, lam):
    diag = ab[-1]
    damped = ab.copy()
    damped[-1] = diag + lam * np.maximum(diag, 1e-9)
    try:
        delta = linalg.solveh_banded(damped, -g, check_finite=False)
    except (linalg.LinAlgError, ValueError):
        return None
    return delta if np.all(np.isfinite(delta)) else None


def lm_optimize(graph: FactorGraph, config: LMConfig | None = None) -> OptimizeReport:
    """Minimize ``total_cost`` in place; ``graph.variables`` end at the best state."""
    config = config or LMConfig()
    x = graph.stacked()
    values = graph.variables
    cost = total_cost(graph, values)
    report = OptimizeReport(initial_cost=cost, final_cost=cost, cost_history=[cost])
    lam = config.lambda_init

    if cost == 0.0:
        report.converged, report.reason = True, "zero cost"
        return report

    for it in range(config.max_iters):
        report.iterations = it + 1
        data, g = _assemble(graph, values)
        ab = _banded(graph, data, len(g))
        if np.max(np.abs(g), initial=0.0) < config.abs_grad_tol:
            report.converged, report.reason = True, "gradient"
            break
        while True:
            delta = _solve(ab, g, lam)
            if delta is not None:
                cand = graph.unstack(x + delta)
                new_cost = total_cost(graph, cand)
                if math.isfinite(new_cost) and new_cost < cost:
                    break
            lam *= config.lambda_up
            if lam > LAMBDA_MAX:
                graph.variables = values
                report.final_cost = cost
                report.reason = "stall"
                raise SolverStallError("damping exceeded %g" % LAMBDA_MAX, values, report)
        rel = (cost - new_cost) / cost
        x, values, cost = x + delta, cand, new_cost
        graph.variables = values
        lam = max(lam * config.lambda_down, LAMBDA_MIN)
        report.accepted_steps += 1
        report.cost_history.append(cost)
        report.lambda_history.append(lam)
        if cost == 0.0 or rel < config.rel_cost_tol:
            report.converged, report.reason = True, "relative cost"
            break
    else:
        report.reason = "max iterations"

    report.final_cost = cost
    return report
