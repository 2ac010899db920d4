"""Path quality metrics reported by the benchmark harness."""

from __future__ import annotations

import numpy as np


def _as_path(path) -> np.ndarray:
    pts = np.asarray(path, dtype=float).reshape(-1, 2)
    if len(pts) == 0:
        raise ValueError("path needs at least one waypoint")
    return pts


def path_length(path) -> float:
    """Sum of consecutive Euclidean distances, in meters."""
    pts = _as_path(path)
    return float(np.sum(np.hypot(*np.diff(pts, axis=0).T)))


def smoothness(path) -> float:
    """Mean absolute heading change over interior waypoints, in radians.

    Zero-length segments carry no heading and are skipped, so repeated
    waypoints do not count as turns. Lower is smoother.
    """
    pts = _as_path(path)
    seg = np.diff(pts, axis=0)
    seg = seg[np.hypot(seg[:, 0], seg[:, 1]) > 0]
    if len(seg) < 2:
        return 0.0
    heading = np.arctan2(seg[:, 1], seg[:, 0])
    turn = np.abs(np.angle(np.exp(1j * np.diff(heading))))
    return float(np.mean(turn))
