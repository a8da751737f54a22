"""Block-grid data model and pure grid transforms for the building zone.

The zone is a dense 11 x 11 x 9 box of block ids. Arrays are indexed
``[x, z, y]`` with ``y`` the height axis, so a horizontal rotation acts on
the two equal leading axes. Block ids: 0 is air, 1..6 are the colored
blocks (blue, red, green, orange, purple, yellow, in that order).
"""
from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .errors import AirBlock, AirCell, OccupiedCell, ParseError

ZONE_X = 11
ZONE_Z = 11
ZONE_Y = 9
ZONE_SHAPE = (ZONE_X, ZONE_Z, ZONE_Y)
N_CELLS = ZONE_X * ZONE_Z * ZONE_Y

AIR = 0
COLOR_NAMES = ("blue", "red", "green", "orange", "purple", "yellow")
N_COLORS = len(COLOR_NAMES)
COLOR_IDS = {name: i + 1 for i, name in enumerate(COLOR_NAMES)}


class CellCoord(NamedTuple):
    """In-bounds cell index (x, z, y)."""

    x: int
    z: int
    y: int

    @classmethod
    def checked(cls, x: int, z: int, y: int) -> "CellCoord":
        if not (0 <= x < ZONE_X and 0 <= z < ZONE_Z and 0 <= y < ZONE_Y):
            raise ValueError(f"cell ({x}, {z}, {y}) outside the {ZONE_SHAPE} zone")
        return cls(int(x), int(z), int(y))


def in_bounds(x: int, z: int, y: int) -> bool:
    return 0 <= x < ZONE_X and 0 <= z < ZONE_Z and 0 <= y < ZONE_Y


class VoxelGrid:
    """Immutable-by-convention snapshot of the building zone.

    ``cells`` is a uint8 array of shape (11, 11, 9). The transform
    functions below never mutate their inputs; stateful mutation is owned
    by the environment, which edits a private copy.
    """

    __slots__ = ("cells",)

    def __init__(self, cells: np.ndarray | None = None):
        if cells is None:
            cells = np.zeros(ZONE_SHAPE, dtype=np.uint8)
        self.cells = cells

    @classmethod
    def empty(cls) -> "VoxelGrid":
        return cls()

    @classmethod
    def from_cells(cls, cells) -> "VoxelGrid":
        arr = np.asarray(cells)
        if arr.shape != ZONE_SHAPE:
            raise ValueError(f"grid shape {arr.shape} != {ZONE_SHAPE}")
        if arr.min(initial=0) < 0 or arr.max(initial=0) > N_COLORS:
            raise ValueError("block ids must lie in 0..6")
        return cls(arr.astype(np.uint8, copy=True))

    @classmethod
    def from_flat(cls, values) -> "VoxelGrid":
        arr = np.asarray(values)
        if arr.size != N_CELLS:
            raise ValueError(f"flat grid must hold {N_CELLS} values, got {arr.size}")
        return cls.from_cells(arr.reshape(ZONE_SHAPE))

    @classmethod
    def from_literal(cls, text: str) -> "VoxelGrid":
        """Parse the text fixture format (see :meth:`to_literal`)."""
        layers = [blk for blk in text.strip().split("\n\n") if blk.strip()]
        if len(layers) != ZONE_Y:
            raise ParseError(f"grid literal must have {ZONE_Y} layers, got {len(layers)}")
        cells = np.zeros(ZONE_SHAPE, dtype=np.uint8)
        for y, layer in enumerate(layers):
            lines = [ln.strip() for ln in layer.strip().splitlines()]
            if len(lines) != ZONE_Z:
                raise ParseError(f"layer {y} must have {ZONE_Z} rows, got {len(lines)}")
            for z, line in enumerate(lines):
                if len(line) != ZONE_X or not line.isdigit():
                    raise ParseError(f"layer {y} row {z} must be {ZONE_X} digits: {line!r}")
                row = [int(ch) for ch in line]
                if max(row) > N_COLORS:
                    raise ParseError(f"layer {y} row {z} has block id > {N_COLORS}")
                cells[:, z, y] = row
        return cls(cells)

    def to_literal(self) -> str:
        """Serialize as 9 y-layers (bottom first) of 11 z-rows of 11 x-digits."""
        layers = []
        for y in range(ZONE_Y):
            rows = ["".join(str(int(v)) for v in self.cells[:, z, y]) for z in range(ZONE_Z)]
            layers.append("\n".join(rows))
        return "\n\n".join(layers)

    def to_flat(self) -> list[int]:
        return [int(v) for v in self.cells.reshape(-1)]

    def nonair(self) -> int:
        return int(np.count_nonzero(self.cells))

    def block_positions(self) -> np.ndarray:
        """(n, 3) int array of non-air cell coordinates in (x, z, y) order."""
        return np.argwhere(self.cells != AIR)

    def copy(self) -> "VoxelGrid":
        return VoxelGrid(self.cells.copy())

    def __getitem__(self, pos) -> int:
        x, z, y = pos
        return int(self.cells[x, z, y])

    def __eq__(self, other) -> bool:
        return isinstance(other, VoxelGrid) and bool(np.array_equal(self.cells, other.cells))

    def __repr__(self) -> str:
        return f"VoxelGrid(nonair={self.nonair()})"


def nonair(grid: VoxelGrid) -> int:
    return grid.nonair()


def place_block(grid: VoxelGrid, pos, block_id: int) -> VoxelGrid:
    """Return a copy of ``grid`` with ``block_id`` placed at ``pos``.

    Raises OccupiedCell if the cell already holds a block and AirBlock if
    ``block_id`` is 0.
    """
    x, z, y = CellCoord.checked(*pos)
    if not 1 <= int(block_id) <= N_COLORS:
        if int(block_id) == AIR:
            raise AirBlock("cannot place air; use break_block to clear a cell")
        raise ValueError(f"block id {block_id} outside 1..{N_COLORS}")
    if grid.cells[x, z, y] != AIR:
        raise OccupiedCell(f"cell ({x}, {z}, {y}) already holds block {grid[x, z, y]}")
    out = grid.cells.copy()
    out[x, z, y] = block_id
    return VoxelGrid(out)


def break_block(grid: VoxelGrid, pos) -> tuple[VoxelGrid, int]:
    """Return (copy of ``grid`` with ``pos`` cleared, removed block id)."""
    x, z, y = CellCoord.checked(*pos)
    removed = int(grid.cells[x, z, y])
    if removed == AIR:
        raise AirCell(f"cell ({x}, {z}, {y}) is already air")
    out = grid.cells.copy()
    out[x, z, y] = AIR
    return VoxelGrid(out), removed


def rotate_cells(cells: np.ndarray, k: int) -> np.ndarray:
    """Rotate a raw cell array k*90 degrees about the vertical axis.

    Convention for k=1: (x, z) -> (z, 10 - x). Any fixed convention works
    because the matcher maximizes over all four; this one is pinned so
    fixtures stay deterministic.
    """
    return np.rot90(cells, k=-int(k) % 4, axes=(0, 1)).copy()


def rotate_y(grid: VoxelGrid, k: int) -> VoxelGrid:
    return VoxelGrid(rotate_cells(grid.cells, k))


def rotate_position(x: int, z: int, k: int) -> tuple[int, int]:
    """Image of footprint cell (x, z) under the same rotation as rotate_y."""
    k = int(k) % 4
    if k == 0:
        return x, z
    if k == 1:
        return z, ZONE_X - 1 - x
    if k == 2:
        return ZONE_X - 1 - x, ZONE_Z - 1 - z
    return ZONE_Z - 1 - z, x
