import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import ndimage

from bycoms.crafted import CORRIDOR_SHAPES, corridor, door
from bycoms.terrain import (
    DEFAULT_GOAL, DEFAULT_START, GridTerrain, PerlinConfig, TerrainError, _lattice_tables,
    dumps_terrain, generate_terrain, load_terrain, loads_terrain, min_path_width,
    path_exists, perlin_grid, perlin_value, safe_zone_slices, save_terrain, summarize,
)
from oracles import brute_width, flood_fill_connected, perlin_scalar, round_up_half

HALF_WIDTHS = [k / 2 for k in range(2, 11)]


def _open(w=20, h=20, start=(2.5, 2.5), goal=(17.5, 17.5)):
    return GridTerrain(np.zeros((h, w), dtype=np.uint8), start, goal)


# -- Perlin -----------------------------------------------------------------


def test_perlin_range_million_samples():
    rng = np.random.default_rng(11)
    for seed in range(4):
        xy = rng.uniform(-500, 500, size=(2, 250_000))
        f = perlin_grid(xy[0], xy[1], PerlinConfig(seed=seed))
        assert f.min() >= -1.0 and f.max() <= 1.0


def test_perlin_lipschitz_small_step():
    rng = np.random.default_rng(5)
    cfg = PerlinConfig(seed=3)
    x, y = rng.uniform(0, 60, size=(2, 20_000))
    ang = rng.uniform(0, 2 * np.pi, size=20_000)
    d = 1e-4
    f0 = perlin_grid(x, y, cfg)
    f1 = perlin_grid(x + d * np.cos(ang), y + d * np.sin(ang), cfg)
    assert np.abs(f1 - f0).max() <= 1e-2


def test_perlin_vanishes_on_lattice_points():
    cfg = PerlinConfig(seed=9)
    i, j = np.mgrid[-3:7, -3:7]
    assert np.all(perlin_grid(10.0 * i, 10.0 * j, cfg) == 0.0)


def test_perlin_matches_scalar_reference():
    cfg = PerlinConfig(seed=42)
    perm, grads = _lattice_tables(42)
    rng = np.random.default_rng(0)
    for x, y in rng.uniform(-80, 80, size=(300, 2)):
        ref = max(-1.0, min(1.0, math.sqrt(2.0) * perlin_scalar(x, y, perm, grads, 10.0)))
        assert perlin_value(x, y, cfg) == pytest.approx(ref, abs=1e-12)


def test_perlin_golden_values(golden):
    doc = json.loads((golden / "perlin_seed42.json").read_text())
    cfg = PerlinConfig(seed=doc["seed"], lattice_cell_size=doc["lattice_cell_size"])
    for (x, y), v in zip(doc["points"], doc["values"]):
        assert perlin_value(x, y, cfg) == pytest.approx(v, abs=1e-12)


def test_perlin_config_validation():
    with pytest.raises(TerrainError):
        PerlinConfig(lattice_cell_size=0)
    with pytest.raises(TerrainError):
        PerlinConfig(threshold_a=1.5)


# -- generation -------------------------------------------------------------


def test_threshold_one_is_all_passable():
    t = generate_terrain(PerlinConfig(seed=1, threshold_a=1.0))
    assert t.cells.sum() == 0


def test_threshold_minus_one_leaves_only_safe_zones():
    t = generate_terrain(PerlinConfig(seed=1, threshold_a=-1.0))
    expect = np.ones((60, 60), dtype=np.uint8)
    for p in (DEFAULT_START, DEFAULT_GOAL):
        expect[safe_zone_slices(p, (60, 60))] = 0
    # f > -1 everywhere except exactly where f == -1, which clipping makes rare
    assert np.array_equal(t.cells, expect)


def test_seed7_golden_bitmap(golden):
    t = generate_terrain(PerlinConfig(seed=7, threshold_a=0.0))
    assert dumps_terrain(t) == (golden / "terrain_seed7_a0.json").read_text()


def test_cells_follow_threshold_rule():
    cfg = PerlinConfig(seed=21, threshold_a=0.1)
    t = generate_terrain(cfg)
    ys, xs = np.mgrid[0:60, 0:60]
    f = perlin_grid(xs + 0.5, ys + 0.5, cfg)
    zones = np.zeros((60, 60), dtype=bool)
    for p in (DEFAULT_START, DEFAULT_GOAL):
        zones[safe_zone_slices(p, (60, 60))] = True
    assert np.array_equal(t.cells[~zones].astype(bool), (f > 0.1)[~zones])


@given(seed=st.integers(0, 2**32), a=st.floats(-1, 1))
def test_safe_zones_always_clear(seed, a):
    t = generate_terrain(PerlinConfig(seed=seed, threshold_a=a))
    for p in (t.start, t.goal):
        assert not t.cells[safe_zone_slices(p, (60, 60))].any()


def test_random_threshold_is_seeded():
    a = generate_terrain(PerlinConfig(seed=5))
    b = generate_terrain(PerlinConfig(seed=5))
    assert a == b


def test_generation_rejects_small_or_misplaced():
    with pytest.raises(TerrainError):
        generate_terrain(PerlinConfig(seed=0), dims=(15, 15))
    with pytest.raises(TerrainError):
        generate_terrain(PerlinConfig(seed=0), start=(2.0, 2.0))


def test_grid_terrain_validation():
    with pytest.raises(TerrainError):
        GridTerrain(np.zeros(5), (1, 1), (2, 2))
    with pytest.raises(TerrainError):
        GridTerrain(np.full((4, 4), 2), (1, 1), (2, 2))
    with pytest.raises(TerrainError):
        GridTerrain(np.zeros((4, 4)), (0.0, 1.0), (2, 2))
    with pytest.raises(TerrainError):
        GridTerrain(np.zeros((4, 4)), (1.5, 1.5), (1.5, 1.5))
    cells = np.zeros((4, 4))
    cells[1, 1] = 1
    with pytest.raises(TerrainError):
        GridTerrain(cells, (1.5, 1.5), (3.5, 3.5))


def test_terrain_cells_are_read_only():
    t = _open()
    with pytest.raises(ValueError):
        t.cells[0, 0] = 1


# -- path_exists ------------------------------------------------------------


def test_open_grid_has_path():
    assert path_exists(_open())


def test_full_wall_blocks_path():
    c = np.zeros((20, 20), dtype=np.uint8)
    c[:, 10] = 1
    assert not path_exists(GridTerrain(c, (2.5, 2.5), (17.5, 2.5)))


def test_diagonal_gap_is_not_a_path():
    c = np.zeros((4, 4), dtype=np.uint8)
    c[0, 1] = c[1, 0] = 1
    assert not path_exists(GridTerrain(c, (0.5, 0.5), (3.5, 3.5)))


def test_path_exists_agrees_with_flood_fill():
    rng = np.random.default_rng(2024)
    found = 0
    for _ in range(1000):
        c = (rng.random((20, 20)) < rng.uniform(0.2, 0.5)).astype(np.uint8)
        c[0, 0] = c[19, 19] = 0
        t = GridTerrain(c, (0.5, 0.5), (19.5, 19.5))
        expect = flood_fill_connected(c, (0, 0), (19, 19))
        assert path_exists(t) == expect
        found += expect
    assert 50 < found < 950  # both outcomes well represented


# -- min_path_width ---------------------------------------------------------


@pytest.mark.parametrize("shape", CORRIDOR_SHAPES)
@pytest.mark.parametrize("width", HALF_WIDTHS)
def test_width_matches_brute_force_oracle(width, shape):
    t = corridor(width, shape)
    assert round_up_half(brute_width(t.cells, t.start, t.goal)) == width
    assert min_path_width(t) == width


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_straight_corridor_widths_are_exact(n):
    c = np.ones((12, 30), dtype=np.uint8)
    c[1:11, 1:11] = 0
    c[1:11, 19:29] = 0
    c[6 - n // 2:6 - n // 2 + n, 11:19] = 0
    assert min_path_width(GridTerrain(c, (6.0, 6.0), (24.0, 6.0))) == float(n)


def test_no_path_width_zero():
    c = np.zeros((20, 20), dtype=np.uint8)
    c[:, 10] = 1
    t = GridTerrain(c, (2.5, 2.5), (17.5, 2.5))
    assert min_path_width(t) == 0.0
    assert summarize(t).path_exists is False


def test_open_grid_width_limited_by_start_clearance():
    # start 2.5 from two edges: clearance 2.5, width 5
    assert min_path_width(_open()) == 5.0


@pytest.mark.parametrize("width", [1, 2, 3, 4, 5])
@pytest.mark.parametrize("shape", CORRIDOR_SHAPES)
def test_width_implies_eroded_path(width, shape):
    t = corridor(width, shape)
    w = min_path_width(t)
    r = (w - 1) / 2
    dist = ndimage.distance_transform_edt(1 - np.pad(t.cells, 1, constant_values=1))[1:-1, 1:-1]
    eroded = (dist <= r).astype(np.uint8)
    eroded[int(t.start[1]), int(t.start[0])] = 0
    eroded[int(t.goal[1]), int(t.goal[0])] = 0
    assert path_exists(GridTerrain(eroded, t.start, t.goal))


@given(data=st.data())
def test_adding_obstacle_never_widens(data):
    seed = data.draw(st.integers(0, 10_000))
    rng = np.random.default_rng(seed)
    c = (rng.random((16, 16)) < 0.25).astype(np.uint8)
    c[1:4, 1:4] = 0
    c[12:15, 12:15] = 0
    t = GridTerrain(c, (2.5, 2.5), (13.5, 13.5))
    free = np.argwhere(c == 0)
    y, x = free[data.draw(st.integers(0, len(free) - 1))]
    if (x, y) in ((2, 2), (13, 13)):
        return
    c2 = c.copy()
    c2[y, x] = 1
    assert min_path_width(GridTerrain(c2, t.start, t.goal)) <= min_path_width(t)


def test_width_and_path_agree_on_door_walls():
    for w in (2, 3, 4, 5):
        t = door(w, 29)
        assert path_exists(t)
        assert min_path_width(t) == w


# -- file format ------------------------------------------------------------


@given(seed=st.integers(0, 2**31), a=st.floats(-1, 1))
def test_file_round_trip_is_exact(seed, a):
    t = generate_terrain(PerlinConfig(seed=seed, threshold_a=a))
    text = dumps_terrain(t)
    back = loads_terrain(text)
    assert back == t
    assert dumps_terrain(back) == text


def test_save_and_load(tmp_path):
    t = corridor(2.5, "l")
    save_terrain(t, tmp_path / "t.json")
    assert load_terrain(tmp_path / "t.json") == t


@pytest.mark.parametrize("text", [
    "not json",
    "[]",
    '{"format": "other"}',
    '{"format": "bycoms-terrain", "version": 1}',
    '{"format": "bycoms-terrain", "width_cells": 2, "height_cells": 2, '
    '"start": [0.5, 0.5], "goal": [1.5, 1.5], "cells": [[0, 0]]}',
    '{"format": "bycoms-terrain", "width_cells": "x", "height_cells": 2, '
    '"start": [0.5, 0.5], "goal": [1.5, 1.5], "cells": [[0, 0], [0, 0]]}',
    '{"format": "bycoms-terrain", "width_cells": 2, "height_cells": 2, '
    '"start": [0.5, 0.5], "goal": [1.5, 1.5], "cells": [[0, 0], [0, 7]]}',
])
def test_malformed_files_raise_terrain_error(text):
    with pytest.raises(TerrainError):
        loads_terrain(text)
