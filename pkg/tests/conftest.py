import random

import numpy as np
import pytest

from gridcraft import VoxelGrid
from gridcraft.tasks import box18_task, l_shape_task


@pytest.fixture
def l_task():
    return l_shape_task()


@pytest.fixture
def box_task():
    return box18_task()


def random_grid(rng: random.Random, max_blocks: int = 12) -> VoxelGrid:
    """Sparse random grid with up to ``max_blocks`` non-air cells."""
    grid = VoxelGrid.empty()
    n = rng.randint(0, max_blocks)
    for _ in range(n):
        x, z, y = rng.randrange(11), rng.randrange(11), rng.randrange(9)
        grid.cells[x, z, y] = rng.randint(1, 6)
    return grid


def oracle_rotate(cells: np.ndarray, k: int) -> np.ndarray:
    """Index-map rotation, independent of the production np.rot90 path."""
    out = np.zeros_like(cells)
    for x in range(11):
        for z in range(11):
            nx, nz = x, z
            for _ in range(k % 4):
                nx, nz = nz, 10 - nx
            out[nx, nz, :] = cells[x, z, :]
    return out


def oracle_max_intersection(built: VoxelGrid, target: VoxelGrid):
    """Brute force: every rotation, every offset, counted by direct slicing.

    Returns (score, rotation, (dx, dz, dy)) with the same lexicographic
    tie-break as the production matcher (ascending scan, strict update).
    """
    tcells = target.cells
    best = (0, 0, (0, 0, 0))
    for k in range(4):
        r = oracle_rotate(built.cells, k)
        for dx in range(-10, 11):
            x0, x1 = max(0, dx), min(11, 11 + dx)
            rx = r[x0 - dx:x1 - dx]
            tx = tcells[x0:x1]
            for dz in range(-10, 11):
                z0, z1 = max(0, dz), min(11, 11 + dz)
                rz = rx[:, z0 - dz:z1 - dz]
                tz = tx[:, z0:z1]
                for dy in range(-8, 9):
                    y0, y1 = max(0, dy), min(9, 9 + dy)
                    a = rz[:, :, y0 - dy:y1 - dy]
                    b = tz[:, :, y0:y1]
                    m = int(np.count_nonzero((a == b) & (a != 0)))
                    if m > best[0]:
                        best = (m, k, (dx, dz, dy))
    return best
