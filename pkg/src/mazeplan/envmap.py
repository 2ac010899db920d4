"""Occupancy grids, signed distance fields and collision queries.

Coordinates: cell ``(col, row)`` has its center at ``(col * resolution,
row * resolution)`` in meters, row 0 at minimum y. Arrays are indexed
``cells[row, col]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import ndimage

# Upper bound on the gradient norm of the bilinear field. Neighbouring centers
# differ by at most 2 cells (free +1 next to obstacle -1), so per-axis slope <= 2.
_LIPSCHITZ = 2.0 * math.sqrt(2.0)


class MapFormatError(ValueError):
    pass


class MapDimensionError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class OccupancyGrid:
    cells: np.ndarray  # bool, True = obstacle
    resolution: float = 1.0

    def __post_init__(self):
        cells = np.asarray(self.cells, dtype=bool)
        if cells.ndim != 2 or min(cells.shape) < 2:
            raise MapDimensionError(f"grid must be at least 2x2, got shape {cells.shape}")
        if not self.resolution > 0:
            raise ValueError("resolution must be positive")
        cells = cells.copy()
        cells[0, :] = cells[-1, :] = True
        cells[:, 0] = cells[:, -1] = True
        cells.flags.writeable = False
        object.__setattr__(self, "cells", cells)
        object.__setattr__(self, "resolution", float(self.resolution))

    @property
    def width(self) -> int:
        return self.cells.shape[1]

    @property
    def height(self) -> int:
        return self.cells.shape[0]

    @property
    def extent(self) -> tuple[float, float]:
        """Largest x and y of the cell-center lattice."""
        return (self.width - 1) * self.resolution, (self.height - 1) * self.resolution

    def cell_of(self, p) -> tuple[int, int]:
        """(col, row) of the cell whose center is nearest to ``p``, clamped to the map."""
        col = int(round(p[0] / self.resolution))
        row = int(round(p[1] / self.resolution))
        return min(max(col, 0), self.width - 1), min(max(row, 0), self.height - 1)

    def is_obstacle(self, p) -> bool:
        col, row = self.cell_of(p)
        return bool(self.cells[row, col])

    def __eq__(self, other):
        if not isinstance(other, OccupancyGrid):
            return NotImplemented
        return self.resolution == other.resolution and np.array_equal(self.cells, other.cells)

    __hash__ = None


@dataclass(frozen=True, eq=False)
class SignedDistanceField:
    values: np.ndarray  # meters, indexed [row, col]
    resolution: float
    grid: OccupancyGrid | None = None

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        values.flags.writeable = False
        object.__setattr__(self, "values", values)
        # Python-side copy for fast scalar lookups in the planners' inner loops.
        object.__setattr__(self, "_rows", values.tolist())

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def extent(self) -> tuple[float, float]:
        return (self.width - 1) * self.resolution, (self.height - 1) * self.resolution

    def __call__(self, x: float, y: float) -> float:
        return signed_distance(self, (x, y))


def build_sdf(grid: OccupancyGrid) -> SignedDistanceField:
    """Exact Euclidean signed distance between cell centers.

    Free cells hold the distance to the nearest obstacle center, obstacle
    cells hold minus the distance to the nearest free center.
    """
    obstacle = grid.cells
    free = ~obstacle
    res = grid.resolution
    outside = ndimage.distance_transform_edt(free)
    if free.any():
        inside = ndimage.distance_transform_edt(obstacle)
    else:
        inside = np.full(obstacle.shape, math.hypot(grid.width, grid.height))
    values = np.where(obstacle, -inside, outside) * res
    return SignedDistanceField(values, res, grid)


def _check_point(p) -> tuple[float, float]:
    x, y = float(p[0]), float(p[1])
    if not (math.isfinite(x) and math.isfinite(y)):
        raise ValueError(f"non-finite point {p!r}")
    return x, y


def signed_distance(sdf: SignedDistanceField, p) -> float:
    """Bilinear interpolation of the field at ``p``; clamps outside the lattice."""
    x, y = _check_point(p)
    return _interp_scalar(sdf, x, y)


def _interp_scalar(sdf: SignedDistanceField, x: float, y: float) -> float:
    rows = sdf._rows
    w, h = sdf.width, sdf.height
    u = min(max(x / sdf.resolution, 0.0), w - 1.0)
    v = min(max(y / sdf.resolution, 0.0), h - 1.0)
    c0 = min(int(u), w - 2)
    r0 = min(int(v), h - 2)
    fu, fv = u - c0, v - r0
    lo, hi = rows[r0], rows[r0 + 1]
    bottom = lo[c0] + fu * (lo[c0 + 1] - lo[c0])
    top = hi[c0] + fu * (hi[c0 + 1] - hi[c0])
    return bottom + fv * (top - bottom)


def _interp_grad_scalar(sdf: SignedDistanceField, x: float, y: float):
    """Value and exact gradient of the bilinear interpolant at a finite point."""
    rows = sdf._rows
    w, h = sdf.width, sdf.height
    res = sdf.resolution
    u_raw, v_raw = x / res, y / res
    u = min(max(u_raw, 0.0), w - 1.0)
    v = min(max(v_raw, 0.0), h - 1.0)
    c0 = min(int(u), w - 2)
    r0 = min(int(v), h - 2)
    fu, fv = u - c0, v - r0
    lo, hi = rows[r0], rows[r0 + 1]
    v00, v01, v10, v11 = lo[c0], lo[c0 + 1], hi[c0], hi[c0 + 1]
    bottom = v00 + fu * (v01 - v00)
    top = v10 + fu * (v11 - v10)
    gx = 0.0 if (u_raw < 0 or u_raw > w - 1) else ((v01 - v00) * (1 - fv) + (v11 - v10) * fv) / res
    gy = 0.0 if (v_raw < 0 or v_raw > h - 1) else (top - bottom) / res
    return bottom + fv * (top - bottom), gx, gy


def signed_distance_many(sdf: SignedDistanceField, points) -> np.ndarray:
    """Vectorized :func:`signed_distance` over an ``(n, 2)`` array."""
    d, _ = _interp_array(sdf, np.asarray(points, dtype=float), want_grad=False)
    return d


def sdf_gradient(sdf: SignedDistanceField, p) -> np.ndarray:
    """Exact gradient of the bilinear interpolant (zero along clamped axes)."""
    x, y = _check_point(p)
    _, gx, gy = _interp_grad_scalar(sdf, x, y)
    return np.array([gx, gy])


def _interp_array(sdf, pts, want_grad):
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError("points must have shape (n, 2)")
    if not np.all(np.isfinite(pts)):
        raise ValueError("non-finite point")
    vals = sdf.values
    w, h = sdf.width, sdf.height
    res = sdf.resolution
    u_raw = pts[:, 0] / res
    v_raw = pts[:, 1] / res
    u = np.clip(u_raw, 0.0, w - 1.0)
    v = np.clip(v_raw, 0.0, h - 1.0)
    c0 = np.minimum(u.astype(int), w - 2)
    r0 = np.minimum(v.astype(int), h - 2)
    fu = u - c0
    fv = v - r0
    v00 = vals[r0, c0]
    v01 = vals[r0, c0 + 1]
    v10 = vals[r0 + 1, c0]
    v11 = vals[r0 + 1, c0 + 1]
    bottom = v00 + fu * (v01 - v00)
    top = v10 + fu * (v11 - v10)
    d = bottom + fv * (top - bottom)
    if not want_grad:
        return d, None
    gx = ((v01 - v00) * (1 - fv) + (v11 - v10) * fv) / res
    gy = (top - bottom) / res
    gx = np.where((u_raw < 0) | (u_raw > w - 1), 0.0, gx)
    gy = np.where((v_raw < 0) | (v_raw > h - 1), 0.0, gy)
    return d, np.stack([gx, gy], axis=1)


def segment_samples(a, b, resolution: float) -> np.ndarray:
    """Points along a->b spaced at most resolution/2 apart, both ends included.

    Endpoints are put in canonical order first so the sample set does not
    depend on segment direction.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if (b[0], b[1]) < (a[0], a[1]):
        a, b = b, a
    length = float(np.hypot(*(b - a)))
    n = max(1, math.ceil(length / (0.5 * resolution)))
    t = np.linspace(0.0, 1.0, n + 1)[:, None]
    return (1.0 - t) * a + t * b


def segment_in_collision(sdf: SignedDistanceField, a, b, clearance: float = 0.0) -> bool:
    """True iff some sample along a->b has signed distance below ``clearance``."""
    if clearance < 0:
        raise ValueError("clearance must be non-negative")
    ax, ay = _check_point(a)
    bx, by = _check_point(b)
    da = _interp_scalar(sdf, ax, ay)
    db = _interp_scalar(sdf, bx, by)
    if da < clearance or db < clearance:
        return True
    half = 0.5 * math.hypot(bx - ax, by - ay)
    # Every sample lies within `half` of an endpoint; the field cannot drop faster than _LIPSCHITZ.
    if min(da, db) - _LIPSCHITZ * half - 1e-9 >= clearance:
        return False
    pts = segment_samples((ax, ay), (bx, by), sdf.resolution)
    return bool(np.any(signed_distance_many(sdf, pts) < clearance))


def path_in_collision(sdf: SignedDistanceField, path, clearance: float = 0.0) -> bool:
    path = np.asarray(path, dtype=float)
    if len(path) == 1:
        return signed_distance(sdf, path[0]) < clearance
    return any(segment_in_collision(sdf, path[i], path[i + 1], clearance) for i in range(len(path) - 1))


# ---------------------------------------------------------------------------
# Portable graymap I/O


def _pgm_tokens(data: bytes, count: int, pos: int):
    """Read ``count`` whitespace-separated header tokens, skipping comments."""
    tokens = []
    n = len(data)
    while len(tokens) < count:
        while pos < n and data[pos : pos + 1].isspace():
            pos += 1
        if pos < n and data[pos : pos + 1] == b"#":
            while pos < n and data[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < n and not data[pos : pos + 1].isspace() and data[pos : pos + 1] != b"#":
            pos += 1
        if start == pos:
            raise MapFormatError("truncated graymap header")
        tokens.append(data[start:pos])
    return tokens, pos


def parse_pgm(data: bytes) -> np.ndarray:
    """Decode a P2/P5 graymap into a ``(rows, cols)`` uint array, top row first."""
    magic = data[:2]
    if magic not in (b"P2", b"P5"):
        raise MapFormatError(f"unsupported magic {magic!r}")
    try:
        tokens, pos = _pgm_tokens(data, 3, 2)
        width, height, maxval = (int(t) for t in tokens)
    except ValueError as exc:
        raise MapFormatError(f"malformed graymap header: {exc}") from exc
    if width <= 0 or height <= 0:
        raise MapDimensionError(f"zero dimension {width}x{height}")
    if not 0 < maxval < 65536:
        raise MapFormatError(f"bad maxval {maxval}")
    if magic == b"P5":
        pos += 1  # single whitespace byte before raster
        dtype = np.dtype(">u2" if maxval > 255 else "u1")
        need = width * height * dtype.itemsize
        raster = data[pos : pos + need]
        if len(raster) < need:
            raise MapFormatError("truncated raster")
        pixels = np.frombuffer(raster, dtype=dtype).astype(np.int64)
    else:
        try:
            pixels = np.array(data[pos:].split(), dtype=np.int64)
        except ValueError as exc:
            raise MapFormatError("non-integer pixel in ASCII graymap") from exc
        if pixels.size < width * height:
            raise MapFormatError("truncated raster")
        pixels = pixels[: width * height]
    if maxval != 255:
        pixels = pixels * 255 // maxval
    return pixels.reshape(height, width)


def load_map(path, resolution: float = 1.0) -> OccupancyGrid:
    pixels = parse_pgm(Path(path).read_bytes())
    # Image rows run top-down; grid row 0 is minimum y.
    return OccupancyGrid(pixels[::-1] < 128, resolution)


def save_map(grid: OccupancyGrid, path) -> None:
    """Write ``grid`` as a binary (P5) graymap: obstacles 0, free 255."""
    pixels = np.where(grid.cells[::-1], 0, 255).astype(np.uint8)
    header = f"P5\n# resolution {grid.resolution}\n{grid.width} {grid.height}\n255\n".encode()
    Path(path).write_bytes(header + pixels.tobytes())


# ---------------------------------------------------------------------------
# Benchmark mazes

MAZE_SIZE = 500

# Wall rectangles (x0, y0, x1, y1) in meters, inclusive, at 1 m/cell.
def _wall_with_doors(y0, y1, doors):
    """Full-width horizontal wall rows y0..y1 with door spans (x0, x1) left open."""
    spans, x = [], 0
    for d0, d1 in sorted(doors):
        if d0 > x:
            spans.append((x, y0, d0 - 1, y1))
        x = d1 + 1
    spans.append((x, y0, MAZE_SIZE - 1, y1))
    return spans


def _slanted_wall(y0, y1, half_width, x_at):
    """Wall rows y0..y1 whose single door of half-width ``half_width`` is centered on ``x_at(y)``."""
    out = []
    for y in range(y0, y1 + 1):
        xc = x_at(y)
        out += _wall_with_doors(y, y, [(int(round(xc - half_width)), int(round(xc + half_width)))])
    return out


def _maze2_line(y):
    # x of the straight start-goal line of problem 2 at height y
    return 250.0 + (400.0 - y) / 2.0


# Doors on the straight line are wide enough that the optimizer sees no obstacle
# cost there; exactly one wall per maze is closed on the line and must be detoured
# through a far door. Thin walls around it stop samples from leaking into the tree.
_ON_LINE = [(391, 409)]
_MAZE_WALLS = {
    1: [
        *_wall_with_doors(360, 389, _ON_LINE),
        *_wall_with_doors(290, 293, _ON_LINE),
        *_wall_with_doors(245, 255, [(15, 35)]),  # closed on the line
        *_wall_with_doors(200, 203, _ON_LINE),
        *_wall_with_doors(110, 140, _ON_LINE),
    ],
    2: [
        *_slanted_wall(330, 359, 18, _maze2_line),
        *_slanted_wall(270, 290, 18, _maze2_line),
        *_slanted_wall(220, 223, 18, _maze2_line),
        *_wall_with_doors(175, 181, [(20, 40)]),  # closed on the line
        *_slanted_wall(130, 133, 18, _maze2_line),
    ],
}

BENCHMARK_ENDPOINTS = {
    1: ((400.0, 400.0), (400.0, 100.0)),
    2: ((250.0, 400.0), (400.0, 100.0)),
}


def gen_benchmark_maze(maze_id: int) -> OccupancyGrid:
    """Deterministic 500 x 500 m maze, 1 m/cell, for benchmark problem 1 or 2."""
    if maze_id not in _MAZE_WALLS:
        raise ValueError(f"unknown maze id {maze_id!r}; expected 1 or 2")
    cells = np.zeros((MAZE_SIZE, MAZE_SIZE), dtype=bool)
    for x0, y0, x1, y1 in _MAZE_WALLS[maze_id]:
        cells[y0 : y1 + 1, x0 : x1 + 1] = True
    return OccupancyGrid(cells, 1.0)
