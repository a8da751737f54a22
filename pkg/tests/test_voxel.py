import random

import numpy as np
import pytest

from conftest import oracle_rotate, random_grid
from gridcraft import (
    AirBlock,
    AirCell,
    CellCoord,
    OccupiedCell,
    VoxelGrid,
    break_block,
    place_block,
    rotate_y,
)
from gridcraft.errors import ParseError


def test_empty_grid():
    g = VoxelGrid.empty()
    assert g.cells.shape == (11, 11, 9)
    assert g.nonair() == 0


def test_place_single_block():
    g = place_block(VoxelGrid.empty(), (5, 5, 0), 1)
    assert g.nonair() == 1
    assert g[5, 5, 0] == 1


def test_place_is_pure():
    g = VoxelGrid.empty()
    place_block(g, (5, 5, 0), 1)
    assert g.nonair() == 0


def test_place_occupied_cell():
    g = place_block(VoxelGrid.empty(), (5, 5, 0), 1)
    with pytest.raises(OccupiedCell):
        place_block(g, (5, 5, 0), 2)


def test_place_air_rejected():
    with pytest.raises(AirBlock):
        place_block(VoxelGrid.empty(), (5, 5, 0), 0)


def test_place_out_of_bounds():
    with pytest.raises(ValueError):
        place_block(VoxelGrid.empty(), (11, 0, 0), 1)


def test_l_shape_placement_sequence(l_task):
    g = VoxelGrid.empty()
    for x, z, y in np.argwhere(l_task.target.cells):
        g = place_block(g, (x, z, y), int(l_task.target[x, z, y]))
    assert g.nonair() == 5
    assert g == l_task.target


def test_break_block():
    g = place_block(VoxelGrid.empty(), (5, 5, 0), 1)
    g2, removed = break_block(g, (5, 5, 0))
    assert removed == 1
    assert g2.nonair() == 0
    assert g.nonair() == 1   # purity


def test_break_place_round_trip():
    rng = random.Random(7)
    g = random_grid(rng, 10)
    pos = tuple(g.block_positions()[0]) if g.nonair() else None
    if pos is None:
        g = place_block(g, (1, 1, 1), 3)
        pos = (1, 1, 1)
    g2, removed = break_block(g, pos)
    assert place_block(g2, pos, removed) == g


def test_break_air_cell():
    with pytest.raises(AirCell):
        break_block(VoxelGrid.empty(), (0, 0, 0))


def test_rotate_identity_and_closure():
    rng = random.Random(3)
    g = random_grid(rng)
    assert rotate_y(g, 0) == g
    assert rotate_y(rotate_y(g, 1), 3) == g
    assert rotate_y(g, 5) == rotate_y(g, 1)   # k mod 4


def test_rotate_single_block_convention():
    g = place_block(VoxelGrid.empty(), (0, 0, 4), 1)
    r = rotate_y(g, 1)
    assert r[0, 10, 4] == 1
    assert r.nonair() == 1


def test_rotate_matches_index_map_oracle():
    rng = random.Random(11)
    for _ in range(25):
        g = random_grid(rng)
        for k in range(4):
            assert np.array_equal(rotate_y(g, k).cells, oracle_rotate(g.cells, k))


def test_rotate_preserves_layer_counts():
    rng = random.Random(5)
    for _ in range(10):
        g = random_grid(rng)
        for k in range(4):
            r = rotate_y(g, k)
            for y in range(9):
                assert (np.bincount(r.cells[:, :, y].reshape(-1), minlength=7)
                        == np.bincount(g.cells[:, :, y].reshape(-1), minlength=7)).all()


def test_rotate_cycles_back():
    rng = random.Random(9)
    g = random_grid(rng)
    for k in range(4):
        h = g
        for _ in range(4):
            h = rotate_y(h, k)
        assert h == g


def test_literal_round_trip():
    rng = random.Random(2)
    for _ in range(10):
        g = random_grid(rng)
        assert VoxelGrid.from_literal(g.to_literal()) == g


def test_literal_layer_orientation():
    g = place_block(VoxelGrid.empty(), (3, 7, 2), 4)
    layers = g.to_literal().split("\n\n")
    assert len(layers) == 9
    lines = layers[2].splitlines()
    assert lines[7][3] == "4"


def test_literal_rejects_bad_shapes():
    with pytest.raises(ParseError):
        VoxelGrid.from_literal("000\n\n000")
    good = VoxelGrid.empty().to_literal()
    with pytest.raises(ParseError):
        VoxelGrid.from_literal(good.replace("0", "9", 1))


def test_flat_round_trip():
    rng = random.Random(4)
    g = random_grid(rng)
    assert VoxelGrid.from_flat(g.to_flat()) == g
    assert len(g.to_flat()) == 1089


def test_from_cells_validates():
    with pytest.raises(ValueError):
        VoxelGrid.from_cells(np.zeros((11, 11, 8), dtype=np.uint8))
    bad = np.zeros((11, 11, 9), dtype=np.int16)
    bad[0, 0, 0] = 7
    with pytest.raises(ValueError):
        VoxelGrid.from_cells(bad)


def test_cell_coord_checked():
    assert CellCoord.checked(10, 10, 8) == (10, 10, 8)
    for bad in [(-1, 0, 0), (0, 11, 0), (0, 0, 9)]:
        with pytest.raises(ValueError):
            CellCoord.checked(*bad)
