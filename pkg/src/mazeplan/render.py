"""Plain SVG storyboards of maps, RRT trees, and paths.

Colors: start green, goal red, GPMP2 path purple, RRT path blue, tree cyan.
"""

from __future__ import annotations

from xml.sax.saxutils import escape

import numpy as np

from .envmap import OccupancyGrid

START_COLOR = "green"
GOAL_COLOR = "red"
GPMP2_COLOR = "purple"
RRT_COLOR = "blue"
TREE_COLOR = "cyan"


class SvgCanvas:
    """World coordinates in meters with y up; cell centers sit on multiples of the resolution."""

    def __init__(self, grid: OccupancyGrid, title: str | None = None):
        self.grid = grid
        self.res = grid.resolution
        self.top = (grid.height - 0.5) * self.res
        self.parts: list[str] = []
        if title:
            self.parts.append(f"<title>{escape(title)}</title>")

    def sy(self, y: float) -> float:
        return self.top - y

    def _fmt(self, v: float) -> str:
        return f"{v:.2f}".rstrip("0").rstrip(".")

    def draw_map(self) -> None:
        """Obstacle cells as row-wise run-length rectangles on a white background."""
        cells = np.asarray(self.grid.cells)
        w, h, res = self.grid.width, self.grid.height, self.res
        rects = [f'<rect x="{self._fmt(-0.5 * res)}" y="0" width="{self._fmt(w * res)}" height="{self._fmt(h * res)}" fill="white"/>']
        for row in range(h):
            line = cells[row]
            # Run boundaries: indices where the occupancy flips.
            edges = np.flatnonzero(np.diff(np.concatenate([[0], line.astype(np.int8), [0]])))
            for c0, c1 in zip(edges[0::2], edges[1::2]):
                x = (c0 - 0.5) * res
                y = self.sy((row + 0.5) * res)
                rects.append(
                    f'<rect x="{self._fmt(x)}" y="{self._fmt(y)}" width="{self._fmt((c1 - c0) * res)}" height="{self._fmt(res)}"/>'
                )
        self.parts.append('<g fill="#555" shape-rendering="crispEdges">' + "".join(rects) + "</g>")

    def draw_segments(self, segments, color: str, width: float = 0.6) -> None:
        d = "".join(
            f"M{self._fmt(a[0])} {self._fmt(self.sy(a[1]))}L{self._fmt(b[0])} {self._fmt(self.sy(b[1]))}"
            for a, b in segments
        )
        if d:
            self.parts.append(f'<path d="{d}" stroke="{color}" stroke-width="{width}" fill="none"/>')

    def draw_tree(self, tree, color: str = TREE_COLOR) -> None:
        v = tree.vertices
        self.draw_segments(((v[p], v[c]) for p, c in tree.edges), color, width=0.5)

    def draw_path(self, path, color: str, width: float = 2.0, label: str | None = None) -> None:
        pts = np.asarray(path, dtype=float)
        if len(pts) == 0:
            return
        coords = " ".join(f"{self._fmt(x)},{self._fmt(self.sy(y))}" for x, y in pts)
        title = f"<title>{escape(label)}</title>" if label else ""
        self.parts.append(
            f'<polyline points="{coords}" stroke="{color}" stroke-width="{width}" fill="none" '
            f'stroke-linejoin="round">{title}</polyline>'
        )

    def draw_marker(self, p, color: str, label: str | None = None, radius: float = 5.0) -> None:
        title = f"<title>{escape(label)}</title>" if label else ""
        self.parts.append(
            f'<circle cx="{self._fmt(p[0])}" cy="{self._fmt(self.sy(p[1]))}" r="{radius}" fill="{color}">{title}</circle>'
        )

    def to_svg(self) -> str:
        w, h, res = self.grid.width, self.grid.height, self.res
        view = f"{self._fmt(-0.5 * res)} 0 {self._fmt(w * res)} {self._fmt(h * res)}"
        return (
            f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="{view}" width="{w}" height="{h}">\n'
            + "\n".join(self.parts)
            + "\n</svg>\n"
        )


def render_run(grid: OccupancyGrid, start, goal, trees=(), gpmp2_path=None, rrt_paths=(), final_path=None,
               title: str | None = None) -> str:
    canvas = SvgCanvas(grid, title)
    canvas.draw_map()
    for tree in trees:
        canvas.draw_tree(tree)
    if gpmp2_path is not None:
        canvas.draw_path(gpmp2_path, GPMP2_COLOR, label="GPMP2")
    for p in rrt_paths:
        canvas.draw_path(p, RRT_COLOR, label="RRT")
    if final_path is not None and gpmp2_path is not None and len(final_path):
        canvas.draw_path(final_path, "black", width=0.8, label="final")
    canvas.draw_marker(start, START_COLOR, "start")
    canvas.draw_marker(goal, GOAL_COLOR, "goal")
    return canvas.to_svg()


def render_follow(grid: OccupancyGrid | None, desired, real, title: str | None = None) -> str:
    """Desired path in purple over the driven trajectory in blue."""
    if grid is None:
        # No map: frame the drawing around both polylines.
        pts = np.vstack([np.asarray(desired, float), np.asarray(real, float)])
        lo, hi = pts.min(axis=0) - 10.0, pts.max(axis=0) + 10.0
        span = hi - lo
        view = f"{lo[0]:.1f} {-hi[1]:.1f} {span[0]:.1f} {span[1]:.1f}"

        def poly(path, color, width):
            coords = " ".join(f"{x:.2f},{-y:.2f}" for x, y in np.asarray(path, float))
            return f'<polyline points="{coords}" stroke="{color}" stroke-width="{width}" fill="none"/>'

        head = f"<title>{escape(title)}</title>\n" if title else ""
        return (
            f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="{view}">\n{head}'
            + poly(desired, GPMP2_COLOR, 2.0)
            + "\n"
            + poly(real, RRT_COLOR, 1.0)
            + "\n</svg>\n"
        )
    canvas = SvgCanvas(grid, title)
    canvas.draw_map()
    canvas.draw_path(desired, GPMP2_COLOR, width=2.0, label="desired")
    canvas.draw_path(real, RRT_COLOR, width=1.0, label="real")
    canvas.draw_marker(desired[0], START_COLOR, "start", radius=3.0)
    canvas.draw_marker(desired[-1], GOAL_COLOR, "goal", radius=3.0)
    return canvas.to_svg()
