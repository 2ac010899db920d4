"""Planar path following: a unicycle driven by a heading PID and a speed PID.

The heading reference is the bearing to a lookahead point on the desired path,
so the loop behaves like pure pursuit with a PID in place of the curvature law.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np


class FollowDivergenceError(RuntimeError):
    """Cross-track error exceeded the divergence limit; ``trace`` holds the run so far."""

    def __init__(self, message, trace):
        super().__init__(message)
        self.trace = trace


def wrap_angle(a: float) -> float:
    """Map an angle to (-pi, pi]."""
    a = math.remainder(a, 2.0 * math.pi)
    return math.pi if a == -math.pi else a


@dataclass(frozen=True)
class PIDGains:
    kp: float = 0.0
    ki: float = 0.0
    kd: float = 0.0
    integral_clamp: float = 10.0

    def __post_init__(self):
        for name in ("kp", "ki", "kd", "integral_clamp"):
            if not getattr(self, name) >= 0:
                raise ValueError(f"{name} must be non-negative")


def pid_step(error: float, prev_error: float, integral: float, gains: PIDGains, dt: float):
    """One PID update. Returns ``(command, new_integral)`` with the integral clamped."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    c = gains.integral_clamp
    new_integral = min(max(integral + error * dt, -c), c)
    command = gains.kp * error + gains.ki * new_integral + gains.kd * (error - prev_error) / dt
    return command, new_integral


@dataclass(frozen=True)
class VehicleState:
    position: tuple[float, float]
    heading: float = 0.0
    speed: float = 0.0

    def __post_init__(self):
        if not np.all(np.isfinite([*self.position, self.heading, self.speed])):
            raise ValueError("vehicle state must be finite")
        if self.speed < 0:
            raise ValueError("speed must be non-negative")
        object.__setattr__(self, "heading", wrap_angle(self.heading))


@dataclass(frozen=True)
class FollowConfig:
    dt: float = 0.1
    cruise_speed: float = 2.0
    max_speed: float = 2.0
    heading_rate_limit: float = 0.5  # rad/s
    lookahead: float = 8.0
    goal_tolerance: float = 5.0
    time_budget: float = 3600.0
    divergence_limit: float = 100.0
    heading_gains: PIDGains = field(default_factory=lambda: PIDGains(kp=1.0, ki=0.0, kd=0.1))
    speed_gains: PIDGains = field(default_factory=lambda: PIDGains(kp=1.0, ki=0.1, kd=0.0))

    def __post_init__(self):
        for name in ("dt", "max_speed", "heading_rate_limit", "time_budget", "divergence_limit"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not 0 <= self.cruise_speed <= self.max_speed:
            raise ValueError("cruise_speed must lie in [0, max_speed]")
        if self.lookahead < 0 or self.goal_tolerance < 0:
            raise ValueError("lookahead and goal_tolerance must be non-negative")


@dataclass
class Trace:
    dt: float
    desired: np.ndarray  # (M, 2) desired path
    times: list = field(default_factory=list)
    states: list = field(default_factory=list)  # VehicleState per time
    cross_track: list = field(default_factory=list)
    reached: bool = False

    @property
    def positions(self) -> np.ndarray:
        return np.array([s.position for s in self.states], dtype=float).reshape(-1, 2)

    @property
    def max_cross_track(self) -> float:
        return max(self.cross_track, default=0.0)

    def tracking_error(self, capture: float = 1.0) -> float:
        """Largest cross-track error after the vehicle first comes within ``capture`` of the path.

        Excludes the initial approach from an off-path start. Infinite if the
        path is never captured.
        """
        for i, e in enumerate(self.cross_track):
            if e <= capture:
                return max(self.cross_track[i:])
        return math.inf

    def to_dict(self) -> dict:
        return {
            "dt": self.dt,
            "reached": self.reached,
            "max_cross_track": self.max_cross_track,
            "tracking_error": self.tracking_error(),
            "desired": self.desired.tolist(),
            "samples": [
                {
                    "t": t,
                    "x": s.position[0],
                    "y": s.position[1],
                    "heading": s.heading,
                    "speed": s.speed,
                    "cross_track": e,
                }
                for t, s, e in zip(self.times, self.states, self.cross_track)
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1) + "\n"


class PolylineTracker:
    """Arc-length bookkeeping on the desired path."""

    def __init__(self, path):
        pts = np.asarray(path, dtype=float).reshape(-1, 2)
        keep = np.concatenate([[True], np.any(np.diff(pts, axis=0) != 0, axis=1)])
        pts = pts[keep]
        if len(pts) < 2:
            raise ValueError("path needs at least two distinct waypoints")
        self.points = pts
        self.seg = np.diff(pts, axis=0)
        self.seg_len = np.hypot(self.seg[:, 0], self.seg[:, 1])
        self.s = np.concatenate([[0.0], np.cumsum(self.seg_len)])
        self.length = float(self.s[-1])
        self.cursor = 0  # first segment still under consideration
        self.travelled = 0.0  # arc length of the last projection

    def _closest(self, p, lo, hi):
        a = self.points[lo:hi]
        d = self.seg[lo:hi]
        t = np.clip(np.einsum("ij,ij->i", p - a, d) / self.seg_len[lo:hi] ** 2, 0.0, 1.0)
        proj = a + t[:, None] * d
        dist = np.hypot(*(proj - p).T)
        k = int(np.argmin(dist))
        return lo + k, float(t[k]), float(dist[k])

    def cross_track(self, p) -> float:
        """Distance from ``p`` to the whole polyline."""
        return self._closest(np.asarray(p, float), 0, len(self.seg))[2]

    def progress(self, p, window: float) -> float:
        """Arc length of the closest point among segments within ``window`` meters ahead of the cursor.

        Restricting the search keeps the projection from jumping to a distant
        part of the path that happens to pass nearby.
        """
        lo = self.cursor
        hi = int(np.searchsorted(self.s, self.travelled + window, side="right"))
        hi = min(max(hi, lo + 1), len(self.seg))
        k, t, _ = self._closest(np.asarray(p, float), lo, hi)
        self.cursor = k
        self.travelled = float(self.s[k] + t * self.seg_len[k])
        return self.travelled

    def point_at(self, s: float) -> np.ndarray:
        s = min(max(s, 0.0), self.length)
        k = min(int(np.searchsorted(self.s, s, side="right")) - 1, len(self.seg) - 1)
        t = (s - self.s[k]) / self.seg_len[k]
        return self.points[k] + t * self.seg[k]


def simulate_follow(path, config: FollowConfig | None = None, initial: VehicleState | None = None) -> Trace:
    """Drive the vehicle along ``path`` until it is within goal tolerance of the end or time runs out."""
    config = config or FollowConfig()
    tracker = PolylineTracker(path)
    if initial is None:
        d = tracker.seg[0]
        initial = VehicleState(tuple(tracker.points[0]), math.atan2(d[1], d[0]), 0.0)
    dt = config.dt
    goal = tracker.points[-1]
    window = 3.0 * config.lookahead + 4.0 * config.max_speed * dt + 20.0
    trace = Trace(dt, tracker.points.copy())

    x, y = initial.position
    heading, speed = initial.heading, initial.speed
    h_int = v_int = 0.0
    h_prev = v_prev = None
    steps = int(math.floor(config.time_budget / dt + 1e-9))

    for k in range(steps + 1):
        e_ct = tracker.cross_track((x, y))
        trace.times.append(k * dt)
        trace.states.append(VehicleState((x, y), heading, speed))
        trace.cross_track.append(e_ct)
        if math.hypot(goal[0] - x, goal[1] - y) <= config.goal_tolerance:
            trace.reached = True
            break
        if e_ct > config.divergence_limit:
            raise FollowDivergenceError(f"cross-track error {e_ct:.1f} m exceeds limit", trace)
        if k == steps:
            break

        s = tracker.progress((x, y), window)
        tx, ty = tracker.point_at(s + config.lookahead)
        if math.hypot(tx - x, ty - y) < 1e-9:
            tx, ty = goal
        e_h = wrap_angle(math.atan2(ty - y, tx - x) - heading)
        e_v = config.cruise_speed - speed
        rate, h_int = pid_step(e_h, e_h if h_prev is None else h_prev, h_int, config.heading_gains, dt)
        accel, v_int = pid_step(e_v, e_v if v_prev is None else v_prev, v_int, config.speed_gains, dt)
        h_prev, v_prev = e_h, e_v

        lim = config.heading_rate_limit
        heading = wrap_angle(heading + min(max(rate, -lim), lim) * dt)
        speed = min(max(speed + accel * dt, 0.0), config.max_speed)
        x += speed * dt * math.cos(heading)
        y += speed * dt * math.sin(heading)

    return trace


def random_start_near(point, radius: float, rng: np.random.Generator) -> VehicleState:
    """A state uniformly placed within ``radius`` of ``point`` with a random heading."""
    r = radius * math.sqrt(rng.random())
    a = rng.uniform(-math.pi, math.pi)
    return VehicleState(
        (float(point[0] + r * math.cos(a)), float(point[1] + r * math.sin(a))), float(rng.uniform(-math.pi, math.pi)), 0.0
    )
