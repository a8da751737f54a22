"""First-person view renderer: a flat-shaded ray marcher over the zone.

Every pixel traces one ray through the voxel volume (Amanatides & Woo
traversal). Blocks render in their palette color scaled by a per-face
factor (top 1.0, sides 0.8, bottom 0.6); the decorative white border ring
sits one cell outside the buildable footprint with its top flush with the
ground plane; everything else is the fixed sky color. The output is a
deterministic function of (cells, pose), which golden-image tests rely
on.

Rendering sits on the per-step hot path, so the march runs as a compiled
per-pixel loop over a sentinel-padded volume (numba, cached between
processes). All math is float64 with fastmath off to keep frames
bit-reproducible.
"""
from __future__ import annotations

import math

import numba
import numpy as np

from .dynamics import EYE_HEIGHT, AgentPose
from .voxel import ZONE_X, ZONE_Y, ZONE_Z

POV_SIZE = 64
FOV_DEGREES = 70.0

SKY_RGB = (135, 206, 235)
BORDER_ID = 7
SENTINEL = 255   # padded shell: the ray left the volume, shade as sky
# index 0 unused (air); 1..6 block colors; 7 border white
PALETTE = np.array(
    [
        (0, 0, 0),
        (58, 70, 228),     # blue
        (220, 58, 58),     # red
        (58, 200, 82),     # green
        (240, 150, 40),    # orange
        (160, 70, 200),    # purple
        (238, 230, 60),    # yellow
        (245, 245, 245),   # border marker
    ],
    dtype=np.float64,
)
SHADE_TOP = 1.0
SHADE_SIDE = 0.8
SHADE_BOTTOM = 0.6

# volume: one cell beyond the footprint and one below ground (the border
# ring lives there), plus a one-cell sentinel shell on every side
_CORE_SHAPE = (ZONE_X + 2, ZONE_Z + 2, ZONE_Y + 1)
_PAD_SHAPE = tuple(s + 2 for s in _CORE_SHAPE)
_CORE_LO = (-1.0, -1.0, -1.0)   # world (x, z, y) of the core corner

_EMPTY_VOLUME = np.full(_PAD_SHAPE, SENTINEL, dtype=np.uint8)
_EMPTY_VOLUME[1:-1, 1:-1, 1:-1] = 0
_EMPTY_VOLUME[1, 1:-1, 1] = BORDER_ID
_EMPTY_VOLUME[-2, 1:-1, 1] = BORDER_ID
_EMPTY_VOLUME[1:-1, 1, 1] = BORDER_ID
_EMPTY_VOLUME[1:-1, -2, 1] = BORDER_ID

_MAX_STEPS = sum(_PAD_SHAPE) + 4


def _camera_frame(pitch: float, yaw: float):
    """Forward/right/up basis in (x, z, y) component order."""
    p = math.radians(pitch)
    w = math.radians(yaw)
    forward = np.array([-math.sin(w) * math.cos(p), math.cos(w) * math.cos(p), -math.sin(p)])
    right = np.array([-math.cos(w), -math.sin(w), 0.0])
    up = np.cross(right, forward)
    return forward, right, up


def _pixel_lattice(size: int):
    half = math.tan(math.radians(FOV_DEGREES) / 2.0)
    centers = (np.arange(size) + 0.5) / size * 2.0 - 1.0
    u = np.broadcast_to(centers * half, (size, size)).reshape(-1)
    v = np.broadcast_to((-centers * half)[:, None], (size, size)).reshape(-1)
    return u, v


_LATTICE_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


@numba.njit(cache=True, fastmath=False)
def _march(volume, eye, dirs, colors, axes, signs, max_steps):   # pragma: no cover
    nx, nz, ny = volume.shape
    lox, loz, loy = -1.0, -1.0, -1.0
    hix, hiz, hiy = lox + (nx - 2), loz + (nz - 2), loy + (ny - 2)
    n = dirs.shape[1]
    for i in range(n):
        e0, e1, e2 = eye[0], eye[1], eye[2]
        d0, d1, d2 = dirs[0, i], dirs[1, i], dirs[2, i]
        # clip to the core box; remember the entry face for shading
        t0 = 0.0
        t1 = math.inf
        axis0 = np.int8(2)
        ok = True
        for a in range(3):
            d = d0 if a == 0 else (d1 if a == 1 else d2)
            e = e0 if a == 0 else (e1 if a == 1 else e2)
            lo = lox if a == 0 else (loz if a == 1 else loy)
            hi = hix if a == 0 else (hiz if a == 1 else hiy)
            if d == 0.0:
                if e < lo or e >= hi:
                    ok = False
                    break
            else:
                ta = (lo - e) / d
                tb = (hi - e) / d
                near = ta if ta < tb else tb
                far = tb if ta < tb else ta
                if near > t0:
                    t0 = near
                    axis0 = np.int8(a)
                if far < t1:
                    t1 = far
        if not ok or t1 <= t0:
            continue
        px = e0 + (t0 + 1e-9) * d0
        pz = e1 + (t0 + 1e-9) * d1
        py = e2 + (t0 + 1e-9) * d2
        cx = int(math.floor(px))
        cz = int(math.floor(pz))
        cy = int(math.floor(py))
        sx = 1 if d0 > 0 else -1
        sz = 1 if d1 > 0 else -1
        sy = 1 if d2 > 0 else -1
        tmx = ((cx + (1 if sx > 0 else 0)) - e0) / d0 if d0 != 0.0 else math.inf
        tmz = ((cz + (1 if sz > 0 else 0)) - e1) / d1 if d1 != 0.0 else math.inf
        tmy = ((cy + (1 if sy > 0 else 0)) - e2) / d2 if d2 != 0.0 else math.inf
        tdx = abs(1.0 / d0) if d0 != 0.0 else math.inf
        tdz = abs(1.0 / d1) if d1 != 0.0 else math.inf
        tdy = abs(1.0 / d2) if d2 != 0.0 else math.inf
        axis = axis0
        sign = sx if axis0 == 0 else (sz if axis0 == 1 else sy)
        for _ in range(max_steps):
            occ = volume[cx + 2, cz + 2, cy + 2]
            if occ != 0:
                colors[i] = occ
                axes[i] = axis
                signs[i] = np.int8(sign)
                break
            if tmx <= tmz and tmx <= tmy:
                cx += sx
                tmx += tdx
                axis = np.int8(0)
                sign = sx
            elif tmz <= tmy:
                cz += sz
                tmz += tdz
                axis = np.int8(1)
                sign = sz
            else:
                cy += sy
                tmy += tdy
                axis = np.int8(2)
                sign = sy


def render_pov(cells: np.ndarray, pose: AgentPose, size: int = POV_SIZE) -> np.ndarray:
    """Render the (size, size, 3) uint8 first-person view."""
    volume = _EMPTY_VOLUME.copy()
    volume[2:-2, 2:-2, 2:-1] = cells

    forward, right, up = _camera_frame(pose.pitch, pose.yaw)
    if size not in _LATTICE_CACHE:
        _LATTICE_CACHE[size] = _pixel_lattice(size)
    u, v = _LATTICE_CACHE[size]
    dirs = forward[None, :] + u[:, None] * right[None, :] + v[:, None] * up[None, :]
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    dirs = np.ascontiguousarray(dirs.T)                    # (3, n), components (x, z, y)
    n = dirs.shape[1]
    eye = np.array([pose.x, pose.z, pose.y + EYE_HEIGHT])

    color_id = np.zeros(n, dtype=np.uint8)
    face_axis = np.full(n, 2, dtype=np.int8)
    face_sign = np.full(n, -1, dtype=np.int8)
    _march(volume, eye, dirs, color_id, face_axis, face_sign, _MAX_STEPS)

    sentinel = color_id == SENTINEL
    shade = np.where(
        face_axis == 2,
        np.where(face_sign < 0, SHADE_TOP, SHADE_BOTTOM),
        SHADE_SIDE,
    )
    safe_id = np.where(sentinel, 0, color_id)
    rgb = PALETTE[safe_id] * shade[:, None]
    rgb[(color_id == 0) | sentinel] = SKY_RGB
    return rgb.astype(np.uint8).reshape(size, size, 3)
