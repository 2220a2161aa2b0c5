"""Hand-built terrains with known minimum path width.

Every builder returns a 60x60 ``GridTerrain`` with the default start and goal
whose only start-goal passages are axis-aligned and exactly ``width`` cells
wide, so the measured width equals ``width``.
"""
from __future__ import annotations

import numpy as np

from .terrain import DEFAULT_DIMS, DEFAULT_GOAL, DEFAULT_START, GridTerrain, safe_zone_slices


def _terrain(cells) -> GridTerrain:
    for p in (DEFAULT_START, DEFAULT_GOAL):
        cells[safe_zone_slices(p, DEFAULT_DIMS)] = 0
    return GridTerrain(cells, DEFAULT_START, DEFAULT_GOAL)


def _blank() -> np.ndarray:
    w, h = DEFAULT_DIMS
    return np.zeros((h, w), dtype=np.uint8)


def door(width: int, gap_at: int, thickness: int = 4, vertical: bool = False) -> GridTerrain:
    """A wall across the whole world between start and goal with one door.

    The wall occupies rows 28.. (columns, if ``vertical``); the door spans
    ``gap_at .. gap_at + width - 1`` along the wall.
    """
    c = _blank()
    c[28:28 + thickness, :] = 1
    c[28:28 + thickness, gap_at:gap_at + width] = 0
    if vertical:
        c = c.T.copy()
    return _terrain(c)


def staggered(width: int) -> GridTerrain:
    """Two walls with doors at opposite ends: an S-shaped route."""
    c = _blank()
    c[24:27, :] = 1
    c[24:27, 1:1 + width] = 0
    c[33:36, :] = 1
    c[33:36, 59 - width:59] = 0
    return _terrain(c)


def elbow(width: int) -> GridTerrain:
    """Solid rock except the two safe zones and an L-shaped corridor."""
    c = np.ones(DEFAULT_DIMS[::-1], dtype=np.uint8)
    y0 = 14
    c[y0:y0 + width, 15:47] = 0  # east from the start zone
    x0 = 42
    c[y0:44, x0:x0 + width] = 0  # north into the goal zone
    return _terrain(c)


def crafted_corpus(widths=(2, 3, 4, 5)) -> list[tuple[str, int, GridTerrain]]:
    """Five terrains per width: (name, width, terrain)."""
    out = []
    for w in widths:
        out += [
            (f"door-centre-{w}", w, door(w, 29)),
            (f"door-west-{w}", w, door(w, 3)),
            (f"door-vertical-{w}", w, door(w, 50, vertical=True)),
            (f"staggered-{w}", w, staggered(w)),
            (f"elbow-{w}", w, elbow(w)),
        ]
    return out


CORRIDOR_SHAPES = ("h", "v", "l")


def _pinch_rows(width: float) -> tuple[int, bool]:
    """Free rows of the corridor and whether it carries a diagonal pinch.

    A half-unit width k + 0.5 comes from a corridor k + 2 rows wide with a
    one-cell bump on each wall, two columns apart, so the closest corners of
    the two sides are sqrt(1 + k^2) apart. Rounded up to a multiple of 0.5
    that is k + 0.5 for k = 1..4.
    """
    twice = round(2 * width)
    if abs(twice - 2 * width) > 1e-9 or not 2 <= twice <= 10:
        raise ValueError(f"corridor width must be one of 1, 1.5, ..., 5, got {width}")
    if twice % 2 == 0:
        return twice // 2, False
    return twice // 2 + 2, True


def corridor(width: float, shape: str = "h") -> GridTerrain:
    """Two 10x10 rooms joined by one corridor whose measured width is ``width``.

    ``shape`` is ``"h"`` (horizontal), ``"v"`` (the same grid transposed) or
    ``"l"`` (east then north, on a larger grid). Start and goal sit in the
    room centres.
    """
    if shape not in CORRIDOR_SHAPES:
        raise ValueError(f"shape must be one of {CORRIDOR_SHAPES}")
    n, pinch = _pinch_rows(width)
    if shape == "l":
        c = np.ones((40, 40), dtype=np.uint8)
        c[2:12, 2:12] = 0
        c[28:38, 28:38] = 0
        y0 = 7 - n // 2
        c[y0:y0 + n, 12:33 - n // 2 + n] = 0  # east leg, runs past the turn column
        x0 = 33 - n // 2
        c[y0:28, x0:x0 + n] = 0  # north leg
        if pinch:
            c[y0, 18] = 1
            c[y0 + n - 1, 20] = 1
        return GridTerrain(c, (7.0, 7.0), (33.0, 33.0))
    c = np.ones((14, 40), dtype=np.uint8)
    c[2:12, 2:12] = 0
    c[2:12, 28:38] = 0
    y0 = 7 - n // 2
    c[y0:y0 + n, 12:28] = 0
    if pinch:
        c[y0, 18] = 1
        c[y0 + n - 1, 20] = 1
    if shape == "v":
        return GridTerrain(c.T.copy(), (7.0, 7.0), (7.0, 33.0))
    return GridTerrain(c, (7.0, 7.0), (33.0, 7.0))
