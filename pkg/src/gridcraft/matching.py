"""Maximal-intersection structure matching and the per-step reward rule.

A built grid matches a target grid at a placement (k, d) when the built
grid, rotated k*90 degrees about the vertical axis and translated by the
integer offset d = (dx, dz, dy), agrees with the target on a non-air cell
of equal block id. The match score of a placement is the number of such
cells; the matcher maximizes over all 4 rotations and every offset in
[-10, 10] x [-10, 10] x [-8, 8], which is the full cross-correlation
support of two zone-sized grids.

Two equivalent computations are provided: :func:`max_intersection` builds
the full score table from scratch, and :class:`MatchTable` maintains the
same table incrementally under single-block edits (O(4 * nonair(target))
per edit), which is what keeps the environment's step loop fast. They are
required to agree bit-exactly and are cross-checked in the test suite.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .voxel import AIR, N_COLORS, ZONE_X, ZONE_Y, ZONE_Z, VoxelGrid, rotate_cells, rotate_position

OFF_X = 2 * ZONE_X - 1   # dx in [-10, 10]
OFF_Z = 2 * ZONE_Z - 1
OFF_Y = 2 * ZONE_Y - 1   # dy in [-8, 8]
TABLE_SHAPE = (4, OFF_X, OFF_Z, OFF_Y)


@dataclass(frozen=True)
class MatchResult:
    """Best placement of the built grid against the target.

    ``offset`` is (dx, dz, dy). Ties are broken by the lexicographically
    smallest (rotation, dx, dz, dy); a zero score reports the identity
    placement.
    """

    score: int
    rotation: int
    offset: tuple[int, int, int]


@dataclass(frozen=True)
class RewardConfig:
    closer: int = 2
    farther: int = -2
    misplace: int = -1
    remove_misplaced: int = 1


def step_reward(prev: MatchResult, new: MatchResult, event: str, cfg: RewardConfig = RewardConfig()) -> int:
    """Reward for one step given consecutive match results.

    ``event`` is "placed", "broken" or "none". A higher max match pays
    ``closer``, a lower one ``farther``; an edit that leaves the max match
    unchanged pays ``misplace`` for a placement and ``remove_misplaced``
    for a removal; anything else pays 0.
    """
    if event not in ("placed", "broken", "none"):
        raise ValueError(f"unknown event {event!r}")
    if new.score > prev.score:
        return cfg.closer
    if new.score < prev.score:
        return cfg.farther
    if event == "placed":
        return cfg.misplace
    if event == "broken":
        return cfg.remove_misplaced
    return 0


def _best_from_table(table: np.ndarray) -> MatchResult:
    flat = int(np.argmax(table))
    score = int(table.reshape(-1)[flat])
    if score == 0:
        return MatchResult(0, 0, (0, 0, 0))
    k, ix, iz, iy = np.unravel_index(flat, TABLE_SHAPE)
    return MatchResult(score, int(k), (int(ix) - (ZONE_X - 1), int(iz) - (ZONE_Z - 1), int(iy) - (ZONE_Y - 1)))


def _positions_by_id(cells: np.ndarray, color_sensitive: bool) -> list[np.ndarray]:
    if color_sensitive:
        return [np.argwhere(cells == c) for c in range(1, N_COLORS + 1)]
    return [np.argwhere(cells != AIR)]


def build_score_table(built_cells: np.ndarray, target_cells: np.ndarray, color_sensitive: bool = True) -> np.ndarray:
    """Full (4, 21, 21, 17) table of match counts for every placement.

    With ``color_sensitive=False`` the table counts occupancy overlaps
    regardless of block id (used by the normalized Hamming distance).
    """
    table = np.zeros(TABLE_SHAPE, dtype=np.int32)
    target_groups = _positions_by_id(target_cells, color_sensitive)
    strides = np.array([OFF_Z * OFF_Y, OFF_Y, 1], dtype=np.int64)
    size = OFF_X * OFF_Z * OFF_Y
    for k in range(4):
        rotated = rotate_cells(built_cells, k)
        built_groups = _positions_by_id(rotated, color_sensitive)
        acc = np.zeros(size, dtype=np.int64)
        hit = False
        for built_pos, target_pos in zip(built_groups, target_groups):
            if built_pos.size == 0 or target_pos.size == 0:
                continue
            hit = True
            # offsets d = t - b, shifted to non-negative table indices
            diff = target_pos[None, :, :] - built_pos[:, None, :]
            diff += np.array([ZONE_X - 1, ZONE_Z - 1, ZONE_Y - 1], dtype=diff.dtype)
            idx = diff.reshape(-1, 3).astype(np.int64) @ strides
            acc += np.bincount(idx, minlength=size)
        if hit:
            table[k] = acc.reshape(OFF_X, OFF_Z, OFF_Y)
    return table


def max_intersection(built: VoxelGrid, target: VoxelGrid) -> MatchResult:
    """Best translation+rotation match of ``built`` against ``target``."""
    return _best_from_table(build_score_table(built.cells, target.cells))


class MatchTable:
    """Incrementally maintained score table for one episode's target.

    ``add``/``remove`` must mirror the edits applied to the built grid;
    ``best()`` then equals ``max_intersection`` on the current state.
    """

    def __init__(self, target: VoxelGrid):
        self._target_by_color = [
            np.ascontiguousarray(pos) for pos in _positions_by_id(target.cells, True)
        ]
        self.table = np.zeros(TABLE_SHAPE, dtype=np.int32)

    def _apply(self, x: int, z: int, y: int, block_id: int, sign: int) -> None:
        targets = self._target_by_color[block_id - 1]
        if targets.size == 0:
            return
        for k in range(4):
            rx, rz = rotate_position(x, z, k)
            dx = targets[:, 0] - rx + (ZONE_X - 1)
            dz = targets[:, 1] - rz + (ZONE_Z - 1)
            dy = targets[:, 2] - y + (ZONE_Y - 1)
            # offsets are distinct for distinct target cells, so plain
            # fancy-index accumulation is safe
            self.table[k, dx, dz, dy] += sign

    def add(self, pos, block_id: int) -> None:
        x, z, y = pos
        self._apply(int(x), int(z), int(y), int(block_id), 1)

    def remove(self, pos, block_id: int) -> None:
        x, z, y = pos
        self._apply(int(x), int(z), int(y), int(block_id), -1)

    def best(self) -> MatchResult:
        return _best_from_table(self.table)


def apply_placement(built: VoxelGrid, rotation: int, offset: tuple[int, int, int]) -> VoxelGrid:
    """Rotate then translate ``built``; cells shifted out of the zone drop."""
    rotated = rotate_cells(built.cells, rotation)
    out = np.zeros_like(rotated)
    dx, dz, dy = offset
    sx = slice(max(0, dx), min(ZONE_X, ZONE_X + dx))
    sz = slice(max(0, dz), min(ZONE_Z, ZONE_Z + dz))
    sy = slice(max(0, dy), min(ZONE_Y, ZONE_Y + dy))
    out[sx, sz, sy] = rotated[
        slice(sx.start - dx, sx.stop - dx),
        slice(sz.start - dz, sz.stop - dz),
        slice(sy.start - dy, sy.stop - dy),
    ]
    return VoxelGrid(out)


def placement_score(built: VoxelGrid, target: VoxelGrid, rotation: int, offset) -> int:
    """Match count of one explicit placement (used to audit MatchResult)."""
    moved = apply_placement(built, rotation, tuple(offset)).cells
    return int(np.count_nonzero((moved == target.cells) & (moved != AIR)))
