"""Occupancy-grid terrains: Perlin generation, connectivity and path width.

Cell ``(cx, cy)`` covers the closed square ``[cx, cx+1] x [cy, cy+1]`` and is
stored at ``cells[cy, cx]`` (row-major, 1 = impassable). Everything outside the
grid counts as impassable.
"""
from __future__ import annotations

import heapq
import json
import math
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np
from scipy import ndimage

DEFAULT_DIMS = (60, 60)
DEFAULT_START = (15.5, 15.5)
DEFAULT_GOAL = (44.5, 44.5)
SAFE_ZONE = 10
# Node spacing for clearance analysis is 1/SUPERSAMPLE grid units.
SUPERSAMPLE = 4
TERRAIN_FORMAT = "bycoms-terrain"
TERRAIN_VERSION = 1

# Classic 2D Perlin with unit gradients peaks at sqrt(2)/2.
_PERLIN_SCALE = math.sqrt(2.0)
_N_GRADIENTS = 256


class TerrainError(ValueError):
    pass


@dataclass(frozen=True)
class PerlinConfig:
    seed: int = 0
    lattice_cell_size: float = 10.0
    threshold_a: float | None = None

    def __post_init__(self):
        if not self.lattice_cell_size > 0:
            raise TerrainError("lattice_cell_size must be positive")
        if self.threshold_a is not None and not -1.0 <= self.threshold_a <= 1.0:
            raise TerrainError("threshold_a must lie in [-1, 1]")


@dataclass(frozen=True, eq=False)
class GridTerrain:
    cells: np.ndarray
    start: tuple[float, float] = DEFAULT_START
    goal: tuple[float, float] = DEFAULT_GOAL

    def __post_init__(self):
        cells = np.ascontiguousarray(self.cells, dtype=np.uint8)
        if cells.ndim != 2:
            raise TerrainError("cells must be a 2D array")
        if np.any(cells > 1):
            raise TerrainError("cells must be 0 (passable) or 1 (impassable)")
        cells.setflags(write=False)
        object.__setattr__(self, "cells", cells)
        object.__setattr__(self, "start", (float(self.start[0]), float(self.start[1])))
        object.__setattr__(self, "goal", (float(self.goal[0]), float(self.goal[1])))
        for name, p in (("start", self.start), ("goal", self.goal)):
            if not (0 < p[0] < self.width_cells and 0 < p[1] < self.height_cells):
                raise TerrainError(f"{name} {p} is not strictly inside the grid")
            if self.cells[int(math.floor(p[1])), int(math.floor(p[0]))]:
                raise TerrainError(f"{name} {p} lies in an impassable cell")
        if self.start == self.goal:
            raise TerrainError("start and goal coincide")

    @property
    def width_cells(self) -> int:
        return self.cells.shape[1]

    @property
    def height_cells(self) -> int:
        return self.cells.shape[0]

    def __eq__(self, other):
        if not isinstance(other, GridTerrain):
            return NotImplemented
        return (
            self.start == other.start
            and self.goal == other.goal
            and np.array_equal(self.cells, other.cells)
        )

    __hash__ = None


@dataclass(frozen=True)
class TerrainSummary:
    path_exists: bool
    min_path_width: float


# -- Perlin noise -----------------------------------------------------------


@lru_cache(maxsize=64)
def _lattice_tables(seed: int):
    rng = np.random.default_rng(seed)
    perm = rng.permutation(256).astype(np.int64)
    perm = np.concatenate([perm, perm])
    angles = 2.0 * np.pi * np.arange(_N_GRADIENTS) / _N_GRADIENTS
    grads = np.stack([np.cos(angles), np.sin(angles)], axis=1)
    return perm, grads


def _fade(t):
    return t * t * t * (t * (t * 6.0 - 15.0) + 10.0)


def perlin_grid(x, y, cfg: PerlinConfig) -> np.ndarray:
    """Vectorised noise at the points ``(x, y)``; values in [-1, 1]."""
    perm, grads = _lattice_tables(cfg.seed)
    x = np.asarray(x, dtype=float) / cfg.lattice_cell_size
    y = np.asarray(y, dtype=float) / cfg.lattice_cell_size
    x0 = np.floor(x)
    y0 = np.floor(y)
    fx = x - x0
    fy = y - y0
    xi = x0.astype(np.int64) & 255
    yi = y0.astype(np.int64) & 255

    def corner(dx, dy):
        h = perm[perm[(xi + dx) & 255] + ((yi + dy) & 255)] % _N_GRADIENTS
        g = grads[h]
        return g[..., 0] * (fx - dx) + g[..., 1] * (fy - dy)

    u = _fade(fx)
    v = _fade(fy)
    n00 = corner(0, 0)
    n10 = corner(1, 0)
    n01 = corner(0, 1)
    n11 = corner(1, 1)
    nx0 = n00 + u * (n10 - n00)
    nx1 = n01 + u * (n11 - n01)
    out = (nx0 + v * (nx1 - nx0)) * _PERLIN_SCALE
    return np.clip(out, -1.0, 1.0)


def perlin_value(x: float, y: float, cfg: PerlinConfig) -> float:
    return float(perlin_grid(x, y, cfg))


# -- generation -------------------------------------------------------------


def safe_zone_slices(p, dims) -> tuple[slice, slice]:
    """Row/column slices of the 10x10 cell block around ``p``."""
    w, h = dims
    cx, cy = int(math.floor(p[0])), int(math.floor(p[1]))
    half = SAFE_ZONE // 2
    x0, y0 = cx - half, cy - half
    if x0 < 0 or y0 < 0 or x0 + SAFE_ZONE > w or y0 + SAFE_ZONE > h:
        raise TerrainError(f"safe zone around {p} does not fit in a {w}x{h} grid")
    return slice(y0, y0 + SAFE_ZONE), slice(x0, x0 + SAFE_ZONE)


def generate_terrain(
    cfg: PerlinConfig,
    dims=DEFAULT_DIMS,
    start=DEFAULT_START,
    goal=DEFAULT_GOAL,
    rng: np.random.Generator | None = None,
) -> GridTerrain:
    """Threshold Perlin noise at cell centres; cells with f > a are impassable.

    When ``cfg.threshold_a`` is unset, ``a`` is drawn uniformly from [-1, 1]
    using ``rng`` (seeded from ``cfg.seed`` if not given).
    """
    w, h = dims
    if w < 2 * SAFE_ZONE or h < 2 * SAFE_ZONE:
        raise TerrainError(f"dims {dims} too small, need at least 20x20")
    a = cfg.threshold_a
    if a is None:
        if rng is None:
            rng = np.random.default_rng(cfg.seed)
        a = float(rng.uniform(-1.0, 1.0))
    ys, xs = np.mgrid[0:h, 0:w]
    f = perlin_grid(xs + 0.5, ys + 0.5, cfg)
    cells = (f > a).astype(np.uint8)
    for p in (start, goal):
        cells[safe_zone_slices(p, dims)] = 0
    return GridTerrain(cells, start, goal)


def draw_threshold(rng: np.random.Generator) -> float:
    return float(rng.uniform(-1.0, 1.0))


# -- analysis ---------------------------------------------------------------


def _cell_of(p) -> tuple[int, int]:
    return int(math.floor(p[0])), int(math.floor(p[1]))


def path_exists(t: GridTerrain) -> bool:
    """A* over 4-connected passable cells from the start cell to the goal cell."""
    cells = t.cells
    h, w = cells.shape
    sx, sy = _cell_of(t.start)
    gx, gy = _cell_of(t.goal)
    best = {(sx, sy): 0}
    heap = [(abs(gx - sx) + abs(gy - sy), 0, sx, sy)]
    while heap:
        _, cost, x, y = heapq.heappop(heap)
        if (x, y) == (gx, gy):
            return True
        if cost > best[(x, y)]:
            continue
        for nx, ny in ((x + 1, y), (x - 1, y), (x, y + 1), (x, y - 1)):
            if 0 <= nx < w and 0 <= ny < h and not cells[ny, nx]:
                nc = cost + 1
                if nc < best.get((nx, ny), nc + 1):
                    best[(nx, ny)] = nc
                    heapq.heappush(heap, (nc + abs(gx - nx) + abs(gy - ny), nc, nx, ny))
    return False


def node_obstacles(t: GridTerrain, s: int = SUPERSAMPLE) -> np.ndarray:
    """Node grid at spacing ``1/s``, True where a node touches an impassable square.

    Node ``[j, i]`` sits at ``(i/s, j/s)``. Nodes on the outer boundary touch
    the exterior and are therefore obstacles.
    """
    h, w = t.cells.shape
    padded = np.ones((h + 2, w + 2), dtype=bool)
    padded[1:-1, 1:-1] = t.cells.astype(bool)
    # Node k along an axis touches padded cells ceil(k/s) and floor(k/s) + 1.
    k = np.arange(s * w + 1)
    cols = padded[:, (k + s - 1) // s] | padded[:, k // s + 1]
    k = np.arange(s * h + 1)
    return cols[(k + s - 1) // s, :] | cols[k // s + 1, :]


def node_clearance(t: GridTerrain, s: int = SUPERSAMPLE) -> np.ndarray:
    """Exact Euclidean clearance of every node, in grid units.

    Clamping a node onto a closed unit square lands on another node, so an
    exact EDT on the node grid is exact for the union of squares.
    """
    obst = node_obstacles(t, s)
    return ndimage.distance_transform_edt(~obst) / s


def _node_index(p, s: int = SUPERSAMPLE) -> tuple[int, int]:
    return int(round(s * p[1])), int(round(s * p[0]))


# Node paths may step diagonally; cell paths (path_exists) may not.
_EIGHT = ndimage.generate_binary_structure(2, 2)


def _connected(mask, a, b) -> bool:
    if not (mask[a] and mask[b]):
        return False
    labels, _ = ndimage.label(mask, structure=_EIGHT)
    return labels[a] == labels[b]


def bottleneck_clearance(t: GridTerrain) -> float:
    """Max over start-goal node paths of the min clearance along the path."""
    clear = node_clearance(t)
    a, b = _node_index(t.start), _node_index(t.goal)
    levels = np.unique(clear[clear > 0])
    levels = levels[levels <= min(clear[a], clear[b])]
    lo, hi = -1, len(levels) - 1
    # Invariant: levels[lo] connects (lo = -1 means none known), levels[hi+1:] do not.
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if _connected(clear >= levels[mid], a, b):
            lo = mid
        else:
            hi = mid - 1
    return float(levels[lo]) if lo >= 0 else 0.0


def min_path_width(t: GridTerrain) -> float:
    """Twice the bottleneck clearance, rounded up to a multiple of 0.5.

    Bottleneck widths on a unit grid cluster on a sparse set (1, 1.41, 2, 2.12,
    2.83, 3, 3.04, 3.54, ...); rounding up is the half-unit quantisation that
    leaves none of the bins 1, 1.5, ..., 5 unattainable. Axis-aligned
    corridors measure exact integers.
    """
    width = 2.0 * bottleneck_clearance(t)
    return math.ceil(width * 2.0 - 1e-9) / 2.0


def summarize(t: GridTerrain) -> TerrainSummary:
    w = min_path_width(t)
    return TerrainSummary(path_exists=w > 0, min_path_width=w)


# -- file format ------------------------------------------------------------


def dumps_terrain(t: GridTerrain) -> str:
    head = {
        "format": TERRAIN_FORMAT,
        "version": TERRAIN_VERSION,
        "width_cells": t.width_cells,
        "height_cells": t.height_cells,
        "start": list(t.start),
        "goal": list(t.goal),
    }
    lines = [json.dumps(head)[:-1] + ', "cells": [']
    rows = [json.dumps(row.tolist(), separators=(",", ":")) for row in t.cells]
    lines.append(",\n".join(rows))
    lines.append("]}")
    return "\n".join(lines) + "\n"


def loads_terrain(text: str) -> GridTerrain:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise TerrainError(f"malformed terrain file: {exc}") from None
    if not isinstance(doc, dict) or doc.get("format") != TERRAIN_FORMAT:
        raise TerrainError("not a terrain file")
    try:
        cells = np.array(doc["cells"], dtype=np.int64)
        shape = (int(doc["height_cells"]), int(doc["width_cells"]))
        start, goal = tuple(doc["start"]), tuple(doc["goal"])
    except KeyError as exc:
        raise TerrainError(f"terrain file lacks {exc}") from None
    except (TypeError, ValueError) as exc:
        raise TerrainError(f"malformed terrain file: {exc}") from None
    if cells.shape != shape:
        raise TerrainError(f"cells shape {cells.shape} does not match {shape[0]}x{shape[1]}")
    return GridTerrain(cells, start, goal)


def save_terrain(t: GridTerrain, path) -> None:
    Path(path).write_text(dumps_terrain(t))


def load_terrain(path) -> GridTerrain:
    return loads_terrain(Path(path).read_text())
