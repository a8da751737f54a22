"""Agent kinematics for the three control modes, plus place/break targeting.

Conventions (also documented in the README):

* Poses are (x, y, z, pitch, yaw) with y the height axis, angles in
  degrees. Positive pitch looks down; pitch is clamped to [-90, 90] and
  yaw wrapped into [-180, 180). Yaw 0 faces +z (south); north is -z,
  east +x, west -x.
* The view direction is
  (-sin(yaw) cos(pitch), -sin(pitch), cos(yaw) cos(pitch)).
* The agent is an axis-aligned box 0.6 x 1.8 x 0.6 with feet at the pose
  point and eyes 1.6 above it. The ground plane y=0 is solid everywhere;
  the zone has no walls, so walking past its edge is possible (the
  environment then terminates the episode).
* Horizontal moves are cancelled whole-axis when the destination box
  would overlap a block; vertical moves sweep to the contact face so the
  agent lands exactly on block tops.

All functions here are pure: they take a pose plus the raw cell array and
return new values. The environment owns all mutable state.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .voxel import AIR, N_COLORS, ZONE_X, ZONE_Y, ZONE_Z

MOVE_SPEED = 0.25       # blocks per tick, human-level walking
GRAVITY = 0.08          # blocks per tick^2
TERMINAL_FALL = 3.0
JUMP_IMPULSE = 0.42
AABB_HALF = 0.3
AGENT_HEIGHT = 1.8
EYE_HEIGHT = 1.6
DEFAULT_REACH = 5.0
CAMERA_CLAMP = 15.0     # max degrees per tick for continuous camera input
TURN_STEP = 90.0        # discrete turn_left / turn_right
LOOK_STEP = 15.0        # discrete look_up / look_down


class ControlMode(str, Enum):
    HUMAN = "human"
    DISCRETE = "discrete"
    CONTINUOUS = "continuous"


MOVE_KEYS = ("none", "forward", "back", "left", "right")
USE_KINDS = ("none", "place", "break")
DISCRETE_OPS = (
    "noop",
    "step_north", "step_south", "step_east", "step_west",
    "turn_left", "turn_right", "look_up", "look_down",
    "jump", "place", "break",
    "select_1", "select_2", "select_3", "select_4", "select_5", "select_6",
)


def _check_hotbar(hotbar):
    if hotbar is not None and not 1 <= int(hotbar) <= N_COLORS:
        raise ValueError(f"hotbar {hotbar} outside 1..{N_COLORS}")


@dataclass(frozen=True)
class HumanAction:
    move: str = "none"
    jump: bool = False
    camera: tuple[float, float] = (0.0, 0.0)   # (dpitch, dyaw)
    use: str = "none"
    hotbar: int | None = None

    def __post_init__(self):
        if self.move not in MOVE_KEYS:
            raise ValueError(f"move {self.move!r} not in {MOVE_KEYS}")
        if self.use not in USE_KINDS:
            raise ValueError(f"use {self.use!r} not in {USE_KINDS}")
        _check_hotbar(self.hotbar)


@dataclass(frozen=True)
class DiscreteAction:
    op: str = "noop"

    def __post_init__(self):
        if self.op not in DISCRETE_OPS:
            raise ValueError(f"op {self.op!r} not in discrete op set")


@dataclass(frozen=True)
class ContinuousAction:
    shift: tuple[float, float, float] = (0.0, 0.0, 0.0)   # (dx, dy, dz)
    camera: tuple[float, float] = (0.0, 0.0)
    use: str = "none"
    hotbar: int | None = None

    def __post_init__(self):
        if self.use not in USE_KINDS:
            raise ValueError(f"use {self.use!r} not in {USE_KINDS}")
        _check_hotbar(self.hotbar)


Action = HumanAction | DiscreteAction | ContinuousAction

ACTION_TYPES = {
    ControlMode.HUMAN: HumanAction,
    ControlMode.DISCRETE: DiscreteAction,
    ControlMode.CONTINUOUS: ContinuousAction,
}


@dataclass
class AgentPose:
    x: float = 0.0
    y: float = 0.0
    z: float = 0.0
    pitch: float = 0.0
    yaw: float = 0.0

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z, self.pitch, self.yaw], dtype=np.float64)


def wrap_yaw(yaw: float) -> float:
    return (yaw + 180.0) % 360.0 - 180.0


def clamp_pitch(pitch: float) -> float:
    return min(90.0, max(-90.0, pitch))


def view_direction(pitch: float, yaw: float) -> tuple[float, float, float]:
    """Unit view vector (dx, dy, dz); positive pitch looks down."""
    p = math.radians(pitch)
    w = math.radians(yaw)
    cp = math.cos(p)
    return (-math.sin(w) * cp, -math.sin(p), math.cos(w) * cp)


# ---------------------------------------------------------------------------
# collision

def _span(lo: float, hi: float) -> range:
    """Integer cells c whose [c, c+1) interval meets [lo, hi)."""
    return range(math.floor(lo), math.ceil(hi))


def _box_blocked(cells: np.ndarray, x: float, y: float, z: float) -> bool:
    """True when the agent box at (x, y, z) overlaps the ground or a block."""
    if y < 0.0:
        return True
    for cx in _span(x - AABB_HALF, x + AABB_HALF):
        if not 0 <= cx < ZONE_X:
            continue
        for cz in _span(z - AABB_HALF, z + AABB_HALF):
            if not 0 <= cz < ZONE_Z:
                continue
            for cy in _span(y, y + AGENT_HEIGHT):
                if 0 <= cy < ZONE_Y and cells[cx, cz, cy] != AIR:
                    return True
    return False


def _footprint_columns(x: float, z: float):
    for cx in _span(x - AABB_HALF, x + AABB_HALF):
        for cz in _span(z - AABB_HALF, z + AABB_HALF):
            yield cx, cz


def support_height(cells: np.ndarray, x: float, z: float, y: float) -> float:
    """Highest solid top at or below the feet under the agent footprint.

    The ground plane contributes 0; block tops are integer heights.
    """
    best = 0.0
    limit = min(ZONE_Y, math.floor(y + 1e-9))
    for cx, cz in _footprint_columns(x, z):
        if not (0 <= cx < ZONE_X and 0 <= cz < ZONE_Z):
            continue
        for cy in range(limit - 1, -1, -1):
            if cells[cx, cz, cy] != AIR:
                if cy + 1.0 > best:
                    best = cy + 1.0
                break
    return best


def sweep_y(cells: np.ndarray, x: float, z: float, y: float, dy: float) -> tuple[float, bool]:
    """Move the agent box vertically by dy, stopping at the first contact.

    Returns (new_y, hit). Falling lands exactly on block tops / the ground
    plane; rising stops with the head flush under block bottoms.
    """
    if dy == 0.0:
        return y, False
    if dy < 0.0:
        target = y + dy
        floor_top = 0.0
        for cx, cz in _footprint_columns(x, z):
            if not (0 <= cx < ZONE_X and 0 <= cz < ZONE_Z):
                continue
            hi = min(ZONE_Y - 1, math.floor(y - 1e-9))
            lo = max(0, math.floor(target))
            for cy in range(hi, lo - 1, -1):
                top = cy + 1.0
                if top <= target or top > y:
                    continue
                if cells[cx, cz, cy] != AIR and top > floor_top:
                    floor_top = top
                    break
        if floor_top >= target:
            return floor_top, True
        return target, False
    head = y + AGENT_HEIGHT
    target_head = head + dy
    ceiling = target_head
    hit = False
    for cx, cz in _footprint_columns(x, z):
        if not (0 <= cx < ZONE_X and 0 <= cz < ZONE_Z):
            continue
        lo = max(0, math.floor(head))
        hi = min(ZONE_Y - 1, math.ceil(target_head) - 1)
        for cy in range(lo, hi + 1):
            bottom = float(cy)
            if bottom < head or bottom >= target_head:
                continue
            if cells[cx, cz, cy] != AIR and bottom < ceiling:
                ceiling = bottom
                hit = True
                break
    if hit:
        return ceiling - AGENT_HEIGHT, True
    return y + dy, False   # exact: unobstructed moves add dy with no rounding


def _move_axis_cancel(cells: np.ndarray, x: float, y: float, z: float, dx: float, dz: float):
    """Horizontal move with whole-axis cancel semantics, x then z."""
    nx = x + dx
    if dx != 0.0 and _box_blocked(cells, nx, y, z):
        nx = x
    nz = z + dz
    if dz != 0.0 and _box_blocked(cells, nx, y, nz):
        nz = z
    return nx, nz


# ---------------------------------------------------------------------------
# per-mode motion

def _apply_camera(pose: AgentPose, camera, clamp: float) -> AgentPose:
    dpitch = min(clamp, max(-clamp, float(camera[0])))
    dyaw = min(clamp, max(-clamp, float(camera[1])))
    return AgentPose(pose.x, pose.y, pose.z, clamp_pitch(pose.pitch + dpitch), wrap_yaw(pose.yaw + dyaw))


def _human_motion(pose: AgentPose, cells: np.ndarray, action: HumanAction, vel_y: float,
                  camera_clamp: float) -> tuple[AgentPose, float]:
    pose = _apply_camera(pose, action.camera, camera_clamp)
    on_ground = pose.y == support_height(cells, pose.x, pose.z, pose.y)
    if on_ground and vel_y <= 0.0:
        vel_y = 0.0
    if action.jump and on_ground:
        vel_y = JUMP_IMPULSE

    x, z = pose.x, pose.z
    if action.move != "none":
        w = math.radians(pose.yaw)
        fx, fz = -math.sin(w), math.cos(w)
        rx, rz = -math.cos(w), -math.sin(w)   # forward x up
        dx, dz = {
            "forward": (fx, fz),
            "back": (-fx, -fz),
            "left": (-rx, -rz),
            "right": (rx, rz),
        }[action.move]
        x, z = _move_axis_cancel(cells, pose.x, pose.y, pose.z, dx * MOVE_SPEED, dz * MOVE_SPEED)

    y, hit = sweep_y(cells, x, z, pose.y, vel_y)
    vel_y = 0.0 if hit else max(vel_y - GRAVITY, -TERMINAL_FALL)
    return AgentPose(x, y, z, pose.pitch, pose.yaw), vel_y


_COMPASS = {"step_north": (0, -1), "step_south": (0, 1), "step_east": (1, 0), "step_west": (-1, 0)}


def _discrete_step(pose: AgentPose, cells: np.ndarray, op: str) -> AgentPose:
    dx, dz = _COMPASS[op]
    tx, tz = pose.x + dx, pose.z + dz
    cx, cz = math.floor(tx), math.floor(tz)
    landing = 0.0
    if 0 <= cx < ZONE_X and 0 <= cz < ZONE_Z:
        # highest reachable top at most one block above the feet
        for cy in range(min(ZONE_Y, math.floor(pose.y + 1.0 + 1e-9)) - 1, -1, -1):
            if cells[cx, cz, cy] != AIR:
                landing = cy + 1.0
                break
    if landing > pose.y + 1.0 or _box_blocked(cells, tx, landing, tz):
        return pose
    return AgentPose(tx, landing, tz, pose.pitch, pose.yaw)


def _discrete_motion(pose: AgentPose, cells: np.ndarray, action: DiscreteAction) -> AgentPose:
    op = action.op
    if op in _COMPASS:
        return _discrete_step(pose, cells, op)
    if op == "turn_left":
        return AgentPose(pose.x, pose.y, pose.z, pose.pitch, wrap_yaw(pose.yaw - TURN_STEP))
    if op == "turn_right":
        return AgentPose(pose.x, pose.y, pose.z, pose.pitch, wrap_yaw(pose.yaw + TURN_STEP))
    if op == "look_up":
        return AgentPose(pose.x, pose.y, pose.z, clamp_pitch(pose.pitch - LOOK_STEP), pose.yaw)
    if op == "look_down":
        return AgentPose(pose.x, pose.y, pose.z, clamp_pitch(pose.pitch + LOOK_STEP), pose.yaw)
    # jump, place, break, select_*, noop: no pose change
    return pose


def _continuous_motion(pose: AgentPose, cells: np.ndarray, action: ContinuousAction,
                       camera_clamp: float) -> AgentPose:
    pose = _apply_camera(pose, action.camera, camera_clamp)
    dx, dy, dz = (min(1.0, max(-1.0, float(v))) for v in action.shift)
    x, z = _move_axis_cancel(cells, pose.x, pose.y, pose.z, dx, dz)
    y, _ = sweep_y(cells, x, z, pose.y, dy)
    return AgentPose(x, y, z, pose.pitch, pose.yaw)


def apply_motion(pose: AgentPose, cells: np.ndarray, action: Action, mode: ControlMode,
                 vel_y: float = 0.0, camera_clamp: float = CAMERA_CLAMP) -> tuple[AgentPose, float]:
    """Advance the pose by one tick. Returns (pose, vertical velocity).

    The velocity thread is only meaningful in human mode; the other modes
    return it unchanged. Raises ModeMismatch-compatible TypeError upstream
    via the environment; here the variant is assumed checked.
    """
    if mode is ControlMode.HUMAN:
        return _human_motion(pose, cells, action, vel_y, camera_clamp)
    if mode is ControlMode.DISCRETE:
        return _discrete_motion(pose, cells, action), vel_y
    return _continuous_motion(pose, cells, action, camera_clamp), vel_y


# ---------------------------------------------------------------------------
# place / break targeting

@dataclass(frozen=True)
class UseOutcome:
    kind: str                                # "placed", "broken" or "miss"
    pos: tuple[int, int, int] | None = None  # cell (x, z, y)
    block_id: int | None = None

    @classmethod
    def miss(cls) -> "UseOutcome":
        return cls("miss")


def _ray_cells(eye, direction, reach: float):
    """Amanatides-Woo cell walk from the eye, yielding (cell, t_enter, axis).

    ``axis`` is the index (0=x, 1=z, 2=y) of the face crossed to enter the
    cell; None for the starting cell. Stops past the reach limit or below
    the ground plane.
    """
    ex, ey, ez = eye
    dx, dy, dz = direction
    pos = [math.floor(ex), math.floor(ez), math.floor(ey)]   # (x, z, y) cell
    comp = (dx, dz, dy)
    step = [0 if c == 0 else (1 if c > 0 else -1) for c in comp]
    origin = (ex, ez, ey)
    t_max = [math.inf] * 3
    t_delta = [math.inf] * 3
    for a in range(3):
        if comp[a] != 0:
            edge = pos[a] + (1 if step[a] > 0 else 0)
            t_max[a] = (edge - origin[a]) / comp[a]
            t_delta[a] = abs(1.0 / comp[a])
    t = 0.0
    axis = None
    while t <= reach:
        yield tuple(pos), t, axis
        axis = t_max.index(min(t_max))
        t = t_max[axis]
        pos[axis] += step[axis]
        t_max[axis] += t_delta[axis]
        if pos[2] < 0:   # crossed below the ground plane
            return


def resolve_use(pose: AgentPose, cells: np.ndarray, use: str, selected: int,
                counts: np.ndarray | None, reach: float = DEFAULT_REACH) -> UseOutcome:
    """Resolve a place/break request against the grid. Pure; never raises.

    A ray is cast from the eye along the view direction up to ``reach``.
    Break removes the first block hit. Place targets the empty cell before
    the hit face, or the cell above the point where the ray meets the
    ground plane inside the zone. Every failure mode is a miss:
    out-of-bounds or occupied target, target overlapping the agent box,
    or an exhausted inventory (``counts`` indexed by block id - 1; None
    means unbounded).
    """
    if use == "none":
        return UseOutcome.miss()
    eye = (pose.x, pose.y + EYE_HEIGHT, pose.z)
    direction = view_direction(pose.pitch, pose.yaw)

    hit_cell = None
    prev_cell = None
    for cell, t, axis in _ray_cells(eye, direction, reach):
        x, z, y = cell
        if 0 <= x < ZONE_X and 0 <= z < ZONE_Z and 0 <= y < ZONE_Y and cells[x, z, y] != AIR:
            hit_cell = cell
            break
        prev_cell = cell

    if use == "break":
        if hit_cell is None:
            return UseOutcome.miss()
        x, z, y = hit_cell
        return UseOutcome("broken", hit_cell, int(cells[x, z, y]))

    # use == "place"
    target = None
    if hit_cell is not None:
        target = prev_cell
    elif direction[1] < 0.0:
        t_ground = eye[1] / -direction[1]
        if t_ground <= reach:
            gx = eye[0] + t_ground * direction[0]
            gz = eye[2] + t_ground * direction[2]
            if 0.0 <= gx < ZONE_X and 0.0 <= gz < ZONE_Z:
                target = (math.floor(gx), math.floor(gz), 0)
    if target is None:
        return UseOutcome.miss()
    x, z, y = target
    if not (0 <= x < ZONE_X and 0 <= z < ZONE_Z and 0 <= y < ZONE_Y):
        return UseOutcome.miss()
    if cells[x, z, y] != AIR:
        return UseOutcome.miss()
    if counts is not None and counts[selected - 1] <= 0:
        return UseOutcome.miss()
    return UseOutcome("placed", target, int(selected))


def box_overlaps_cell(pose: AgentPose, cell) -> bool:
    """True when the agent box at ``pose`` intersects the given cell."""
    x, z, y = cell
    return (x < pose.x + AABB_HALF and x + 1 > pose.x - AABB_HALF
            and z < pose.z + AABB_HALF and z + 1 > pose.z - AABB_HALF
            and y < pose.y + AGENT_HEIGHT and y + 1 > pose.y)


def box_blocked(cells: np.ndarray, x: float, y: float, z: float) -> bool:
    """Public wrapper used by the environment's overlap resolution."""
    return _box_blocked(cells, x, y, z)
