"""Constant-velocity GP prior and hinge-loss obstacle cost.

A support state is the 4-vector ``[px, py, vx, vy]``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .envmap import SignedDistanceField, _check_point, _interp_grad_scalar

STATE_DIM = 4


@dataclass(frozen=True)
class TrajectoryState:
    position: tuple[float, float]
    velocity: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        if not np.all(np.isfinite(self.as_vector())):
            raise ValueError("trajectory state must be finite")

    def as_vector(self) -> np.ndarray:
        return np.array([*self.position, *self.velocity], dtype=float)

    @classmethod
    def from_vector(cls, v) -> "TrajectoryState":
        v = np.asarray(v, dtype=float)
        return cls((float(v[0]), float(v[1])), (float(v[2]), float(v[3])))


@dataclass(frozen=True)
class GPPriorParams:
    qc: float = 1.0
    total_time: float = 100.0
    num_states: int = 31

    def __post_init__(self):
        if not self.qc > 0:
            raise ValueError("qc must be positive")
        if not self.total_time > 0:
            raise ValueError("total_time must be positive")
        if self.num_states < 2:
            raise ValueError("num_states must be at least 2")

    @property
    def dt(self) -> float:
        return self.total_time / (self.num_states - 1)


@dataclass(frozen=True)
class ObstacleModel:
    epsilon: float = 8.0
    sigma_obs: float = 0.5

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if not self.sigma_obs > 0:
            raise ValueError("sigma_obs must be positive")


def _as_state(s) -> np.ndarray:
    if isinstance(s, TrajectoryState):
        return s.as_vector()
    return np.asarray(s, dtype=float)


def transition(dt: float) -> np.ndarray:
    if not dt > 0:
        raise ValueError("dt must be positive")
    phi = np.eye(4)
    phi[0, 2] = phi[1, 3] = dt
    return phi


def process_noise_cov(dt: float, qc: float) -> np.ndarray:
    """Covariance accumulated over ``dt`` by white-noise acceleration of density ``qc``."""
    if not dt > 0 or not qc > 0:
        raise ValueError("dt and qc must be positive")
    i2 = np.eye(2)
    return qc * np.block(
        [
            [dt**3 / 3.0 * i2, dt**2 / 2.0 * i2],
            [dt**2 / 2.0 * i2, dt * i2],
        ]
    )


def whitener(cov: np.ndarray) -> np.ndarray:
    """Matrix W with W.T @ W = inv(cov), from the Cholesky factor of ``cov``."""
    chol = np.linalg.cholesky(cov)
    return np.linalg.solve(chol, np.eye(len(cov)))


def gp_prior_error(theta_i, theta_next, dt: float) -> np.ndarray:
    """Unwhitened constant-velocity residual ``Phi(dt) theta_i - theta_next``."""
    return transition(dt) @ _as_state(theta_i) - _as_state(theta_next)


def hinge_cost(d: float, epsilon: float) -> float:
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    return epsilon - d if d <= epsilon else 0.0


def obstacle_error(theta, sdf: SignedDistanceField, model: ObstacleModel) -> tuple[float, np.ndarray]:
    """Whitened hinge residual at the state's position and its gradient wrt the state.

    The gradient is zero at and beyond the hinge kink.
    """
    px, py = _check_point(_as_state(theta))
    d, gx, gy = _interp_grad_scalar(sdf, px, py)
    residual = hinge_cost(d, model.epsilon) / model.sigma_obs
    grad = np.zeros(STATE_DIM)
    if d < model.epsilon:
        grad[0] = -gx / model.sigma_obs
        grad[1] = -gy / model.sigma_obs
    return residual, grad
