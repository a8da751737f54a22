"""JSON wire encoding shared by the serve RPC, external agents and clients.

Observations cross the boundary as::

    {"zone": [1089 ints], "inventory": [6 ints],
     "pose": [x, y, z, pitch, yaw], "dialog": str, "pov_b64": str?}

``zone`` is the C-order ravel of the (11, 11, 9) array, index
``(x * 11 + z) * 9 + y``. ``pov_b64`` is base64 of the raw 64*64*3 RGB
bytes and is present only when rendering is enabled.
"""
from __future__ import annotations

import base64

import numpy as np

from .environment import Observation, StepResult
from .render import POV_SIZE
from .voxel import N_COLORS, ZONE_SHAPE

SPACES = {
    "pov": [POV_SIZE, POV_SIZE, 3],
    "inventory": [N_COLORS],
    "zone": list(ZONE_SHAPE),
    "pose": [5],
}


def spaces_descriptor(mode: str) -> dict:
    return {"observation": dict(SPACES), "action_mode": mode}


def observation_to_json(obs: Observation, include_pov: bool = False) -> dict:
    out = {
        "zone": [int(v) for v in obs.zone.reshape(-1)],
        "inventory": [int(v) for v in obs.inventory],
        "pose": [float(v) for v in obs.pose],
        "dialog": obs.dialog,
    }
    if include_pov:
        out["pov_b64"] = base64.b64encode(obs.pov.tobytes()).decode("ascii")
    return out


def observation_from_json(data: dict) -> Observation:
    pov = np.zeros((POV_SIZE, POV_SIZE, 3), dtype=np.uint8)
    if "pov_b64" in data:
        raw = base64.b64decode(data["pov_b64"])
        pov = np.frombuffer(raw, dtype=np.uint8).reshape(POV_SIZE, POV_SIZE, 3).copy()
    return Observation(
        pov=pov,
        inventory=np.array(data["inventory"], dtype=np.int64),
        zone=np.array(data["zone"], dtype=np.uint8).reshape(ZONE_SHAPE),
        dialog=data["dialog"],
        pose=np.array(data["pose"], dtype=np.float64),
    )


def step_result_to_json(result: StepResult, include_pov: bool = False) -> dict:
    info = result.info
    return {
        "observation": observation_to_json(result.observation, include_pov),
        "reward": int(result.reward),
        "done": bool(result.done),
        "info": {
            "match_score": info.match.score,
            "rotation": info.match.rotation,
            "offset": list(info.match.offset),
            "steps": info.steps,
            "termination_reason": info.termination_reason,
        },
    }
