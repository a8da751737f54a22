"""Task corpus data model, file formats, fixtures and the sub-goal queue.

File formats (all JSON lines, one object per line):

``tasks.jsonl``
    {"id": str, "dialog": [{"speaker": "architect"|"builder", "text": str,
    "timestamp": str|null}], "target": GRID, "subgoals": [GRID, ...],
    "initial": GRID|null, "subgoal_utterances": [int|null, ...]|null}

``episodes.jsonl``
    header  {"type": "episode", "index": int, "task_id": str,
             "mode": str, "seed": int}
    steps   {"type": "step", "t": int, "action": ACTION, "reward": int,
             "match_score": int}
    footer  {"type": "end", "index": int, "steps": int,
             "total_reward": int, "termination": str, "rho": float,
             "success": bool, "final_grid": GRID}

GRID is either the text literal produced by ``VoxelGrid.to_literal`` or a
flat list of 1089 ints in C order of the (x, z, y) array, i.e. index
``(x * 11 + z) * 9 + y``. Writers emit the literal. ACTION objects carry a
"mode" discriminator; see ``action_to_json``.

Game observation records (the human-to-human capture format) are rows
{"timestamp": iso8601, "chat": [str], "pose": [x, y, z, pitch, yaw],
"inventory": [6 ints], "blocks": [[x, z, y, id], ...]} ordered by time.
"""
from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from datetime import datetime

import numpy as np

from .dynamics import (
    Action,
    ContinuousAction,
    ControlMode,
    DiscreteAction,
    HumanAction,
)
from .errors import ParseError, ValidationError
from .matching import max_intersection
from .voxel import AIR, COLOR_NAMES, N_CELLS, N_COLORS, ZONE_X, ZONE_Y, ZONE_Z, VoxelGrid


@dataclass(frozen=True)
class Utterance:
    speaker: str            # "architect" or "builder"
    text: str
    timestamp: str | None = None

    def __post_init__(self):
        if self.speaker not in ("architect", "builder"):
            raise ValidationError(f"unknown speaker {self.speaker!r}")
        if not self.text:
            raise ValidationError("utterance text must be non-empty")


@dataclass
class Task:
    id: str
    dialog: list[Utterance]
    target: VoxelGrid
    subgoals: list[VoxelGrid] = field(default_factory=list)
    initial: VoxelGrid = field(default_factory=VoxelGrid.empty)
    subgoal_utterances: list[int | None] | None = None


def validate_task(task: Task, where: str = "task") -> None:
    """Check the documented task invariants; raise ValidationError."""
    if task.target.nonair() < 1:
        raise ValidationError(f"{where} (id={task.id}): target has no blocks")
    chain = list(task.subgoals)
    if chain:
        seq = chain + [task.target]
        for i in range(len(seq) - 1):
            a, b = seq[i].cells, seq[i + 1].cells
            bad = (a != AIR) & (a != b)
            if bad.any():
                x, z, y = np.argwhere(bad)[0]
                raise ValidationError(
                    f"{where} (id={task.id}): subgoal {i} not contained in its "
                    f"successor at cell ({x}, {z}, {y})")
        if not np.array_equal(chain[-1].cells, task.target.cells):
            raise ValidationError(f"{where} (id={task.id}): last subgoal != target")
    if task.subgoal_utterances is not None and len(task.subgoal_utterances) != len(chain):
        raise ValidationError(f"{where} (id={task.id}): subgoal_utterances length mismatch")


# ---------------------------------------------------------------------------
# grid / action JSON encoding

def grid_to_json(grid: VoxelGrid) -> str:
    return grid.to_literal()


def grid_from_json(value, where: str = "grid") -> VoxelGrid:
    if isinstance(value, str):
        return VoxelGrid.from_literal(value)
    if isinstance(value, list):
        if len(value) != N_CELLS:
            raise ParseError(f"{where}: flat grid needs {N_CELLS} ints, got {len(value)}")
        return VoxelGrid.from_flat(value)
    raise ParseError(f"{where}: expected literal string or flat int list")


def action_to_json(action: Action) -> dict:
    if isinstance(action, HumanAction):
        return {"mode": "human", "move": action.move, "jump": action.jump,
                "camera": list(action.camera), "use": action.use, "hotbar": action.hotbar}
    if isinstance(action, DiscreteAction):
        return {"mode": "discrete", "op": action.op}
    if isinstance(action, ContinuousAction):
        return {"mode": "continuous", "shift": list(action.shift),
                "camera": list(action.camera), "use": action.use, "hotbar": action.hotbar}
    raise TypeError(f"not an action: {action!r}")


def action_from_json(data: dict) -> Action:
    try:
        mode = data["mode"]
        if mode == "human":
            return HumanAction(move=data.get("move", "none"), jump=bool(data.get("jump", False)),
                               camera=tuple(data.get("camera", (0.0, 0.0))),
                               use=data.get("use", "none"), hotbar=data.get("hotbar"))
        if mode == "discrete":
            return DiscreteAction(op=data.get("op", "noop"))
        if mode == "continuous":
            return ContinuousAction(shift=tuple(data.get("shift", (0.0, 0.0, 0.0))),
                                    camera=tuple(data.get("camera", (0.0, 0.0))),
                                    use=data.get("use", "none"), hotbar=data.get("hotbar"))
        raise ParseError(f"unknown action mode {mode!r}")
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"bad action record: {exc}") from exc


# ---------------------------------------------------------------------------
# tasks.jsonl

def task_to_json(task: Task) -> dict:
    out = {
        "id": task.id,
        "dialog": [{"speaker": u.speaker, "text": u.text, "timestamp": u.timestamp}
                   for u in task.dialog],
        "target": grid_to_json(task.target),
        "subgoals": [grid_to_json(g) for g in task.subgoals],
        "initial": grid_to_json(task.initial) if task.initial.nonair() else None,
        "subgoal_utterances": task.subgoal_utterances,
    }
    return out


def task_from_json(data: dict, where: str = "task") -> Task:
    try:
        dialog = [Utterance(d["speaker"], d["text"], d.get("timestamp"))
                  for d in data.get("dialog", [])]
        target = grid_from_json(data["target"], f"{where}.target")
        subgoals = [grid_from_json(g, f"{where}.subgoals[{i}]")
                    for i, g in enumerate(data.get("subgoals") or [])]
        initial = data.get("initial")
        task = Task(
            id=str(data["id"]),
            dialog=dialog,
            target=target,
            subgoals=subgoals,
            initial=grid_from_json(initial, f"{where}.initial") if initial else VoxelGrid.empty(),
            subgoal_utterances=data.get("subgoal_utterances"),
        )
    except KeyError as exc:
        raise ParseError(f"{where}: missing field {exc}") from exc
    validate_task(task, where)
    return task


def load_tasks(path) -> list[Task]:
    """Load and validate a tasks.jsonl file."""
    tasks = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                data = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"{path}:{lineno}: {exc}") from exc
            tasks.append(task_from_json(data, where=f"{path}:{lineno}"))
    return tasks


def save_tasks(tasks: list[Task], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for task in tasks:
            fh.write(json.dumps(task_to_json(task)) + "\n")


# ---------------------------------------------------------------------------
# episodes.jsonl

@dataclass
class EpisodeStep:
    action: Action
    reward: int
    match_score: int


@dataclass
class EpisodeRecord:
    index: int
    task_id: str
    mode: ControlMode
    seed: int
    steps: list[EpisodeStep]
    final_grid: VoxelGrid
    termination: str
    total_reward: int
    rho: float
    success: bool


def episode_to_lines(rec: EpisodeRecord) -> list[dict]:
    lines: list[dict] = [{"type": "episode", "index": rec.index, "task_id": rec.task_id,
                          "mode": rec.mode.value, "seed": rec.seed}]
    for t, s in enumerate(rec.steps):
        lines.append({"type": "step", "t": t, "action": action_to_json(s.action),
                      "reward": s.reward, "match_score": s.match_score})
    lines.append({"type": "end", "index": rec.index, "steps": len(rec.steps),
                  "total_reward": rec.total_reward, "termination": rec.termination,
                  "rho": rec.rho, "success": rec.success,
                  "final_grid": grid_to_json(rec.final_grid)})
    return lines


def save_episodes(records: list[EpisodeRecord], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            for obj in episode_to_lines(rec):
                fh.write(json.dumps(obj) + "\n")


def load_episodes(path) -> list[EpisodeRecord]:
    records: list[EpisodeRecord] = []
    current: dict | None = None
    steps: list[EpisodeStep] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"{path}:{lineno}: {exc}") from exc
            kind = obj.get("type")
            if kind == "episode":
                if current is not None:
                    raise ParseError(f"{path}:{lineno}: episode header inside open episode")
                current = obj
                steps = []
            elif kind == "step":
                if current is None:
                    raise ParseError(f"{path}:{lineno}: step outside an episode")
                steps.append(EpisodeStep(action_from_json(obj["action"]),
                                         int(obj["reward"]), int(obj["match_score"])))
            elif kind == "end":
                if current is None:
                    raise ParseError(f"{path}:{lineno}: end without a header")
                records.append(EpisodeRecord(
                    index=int(current["index"]), task_id=str(current["task_id"]),
                    mode=ControlMode(current["mode"]), seed=int(current["seed"]),
                    steps=steps, final_grid=grid_from_json(obj["final_grid"]),
                    termination=str(obj["termination"]),
                    total_reward=int(obj["total_reward"]),
                    rho=float(obj["rho"]), success=bool(obj["success"])))
                current = None
            else:
                raise ParseError(f"{path}:{lineno}: unknown record type {kind!r}")
    if current is not None:
        raise ParseError(f"{path}: truncated final episode (no end record)")
    return records


# ---------------------------------------------------------------------------
# game observation records (human-to-human capture rows)

@dataclass
class GameObservation:
    timestamp: str
    chat: list[str]
    pose: tuple[float, float, float, float, float]
    inventory: tuple[int, ...]
    blocks: list[tuple[int, int, int, int]]


def load_game_record(path) -> list[GameObservation]:
    rows: list[GameObservation] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
                pose = tuple(float(v) for v in obj["pose"])
                inv = tuple(int(v) for v in obj["inventory"])
                blocks = [tuple(int(v) for v in b) for b in obj["blocks"]]
                if len(pose) != 5 or len(inv) != N_COLORS:
                    raise ValueError("pose needs 5 values, inventory 6")
                rows.append(GameObservation(str(obj["timestamp"]), list(obj["chat"]),
                                            pose, inv, blocks))
            except (KeyError, TypeError, ValueError) as exc:
                raise ParseError(f"{path}:{lineno}: {exc}") from exc
    times = [datetime.fromisoformat(r.timestamp) for r in rows]
    for i in range(1, len(times)):
        if times[i] < times[i - 1]:
            raise ValidationError(f"{path}: rows out of time order at row {i + 1}")
    return rows


# ---------------------------------------------------------------------------
# sub-goal queue

class SubgoalQueue:
    """Forward-only queue over a task's cumulative sub-goal grids.

    A sub-goal is complete when the built grid contains it up to the
    matcher's translations/rotations, i.e. the max intersection equals the
    sub-goal's block count. Popped sub-goals never come back, matching the
    pop-and-wait protocol the curriculum uses.
    """

    def __init__(self, subgoals: list[VoxelGrid]):
        self._pending = list(subgoals)

    @property
    def current(self) -> VoxelGrid | None:
        return self._pending[0] if self._pending else None

    def __len__(self) -> int:
        return len(self._pending)

    def advance(self, built: VoxelGrid) -> tuple[int, VoxelGrid | None]:
        """Pop every leading sub-goal the built grid completes.

        Returns (number popped this call, new head or None).
        """
        popped = 0
        while self._pending:
            head = self._pending[0]
            if max_intersection(built, head).score != head.nonair():
                break
            self._pending.pop(0)
            popped += 1
        return popped, self.current


# ---------------------------------------------------------------------------
# fixtures

L_SHAPE_TASK_ID = "fixture_l_shape_5"
BOX18_TASK_ID = "fixture_box_18"

_SPATIAL_WORDS = ("left", "right", "middle", "corner", "row", "column", "center", "front")


def l_shape_task() -> Task:
    """Five blue blocks in an L on the ground, the classic warm-up shape."""
    grid = VoxelGrid.empty()
    cells = [(5, 5), (6, 5), (7, 5), (5, 6), (5, 7)]
    for x, z in cells:
        grid.cells[x, z, 0] = 1
    first = VoxelGrid.empty()
    for x, z in cells[:3]:
        first.cells[x, z, 0] = 1
    dialog = [
        Utterance("architect", "build a row of three blue blocks in the middle"),
        Utterance("builder", "okay done"),
        Utterance("architect", "now add two more blue blocks to the left to make an L"),
    ]
    return Task(id=L_SHAPE_TASK_ID, dialog=dialog, target=grid,
                subgoals=[first, grid.copy()], subgoal_utterances=[0, 2])


def box18_task() -> Task:
    """A 3 x 3 footprint, two layers tall: the 18-block fixture."""
    grid = VoxelGrid.empty()
    for x in range(4, 7):
        for z in range(4, 7):
            grid.cells[x, z, 0] = 2
            grid.cells[x, z, 1] = 6
    first = VoxelGrid.empty()
    first.cells[4:7, 4:7, 0] = 2
    dialog = [
        Utterance("architect", "make a three by three red square in the center"),
        Utterance("builder", "done"),
        Utterance("architect", "great, now cover it with a yellow layer on top"),
    ]
    return Task(id=BOX18_TASK_ID, dialog=dialog, target=grid,
                subgoals=[first, grid.copy()], subgoal_utterances=[0, 2])


def _random_structure(rng: random.Random, size: int, max_height: int) -> list[tuple[int, int, int, int]]:
    """Grow a connected, column-supported structure of ``size`` blocks.

    Returns placement order [(x, z, y, color)]. Every block rests on the
    ground or on another block, so a scripted agent can build it bottom-up.
    """
    heights: dict[tuple[int, int], int] = {}
    order: list[tuple[int, int, int, int]] = []
    color_counts = [0] * N_COLORS
    start = (rng.randrange(3, ZONE_X - 3), rng.randrange(3, ZONE_Z - 3))
    heights[start] = 0
    while len(order) < size:
        candidates: list[tuple[int, int]] = []
        for (cx, cz), h in heights.items():
            if h < max_height:
                candidates.append((cx, cz))
            for dx, dz in ((1, 0), (-1, 0), (0, 1), (0, -1)):
                nx, nz = cx + dx, cz + dz
                if 0 <= nx < ZONE_X and 0 <= nz < ZONE_Z and (nx, nz) not in heights:
                    candidates.append((nx, nz))
        cx, cz = rng.choice(sorted(set(candidates)))
        y = heights.get((cx, cz), 0)
        colors = [c for c in range(1, N_COLORS + 1) if color_counts[c - 1] < 18]
        color = rng.choice(colors)
        color_counts[color - 1] += 1
        order.append((cx, cz, y, color))
        heights[(cx, cz)] = y + 1
    return order


def _instruction(rng: random.Random, chunk: list[tuple[int, int, int, int]]) -> str:
    colors = sorted({COLOR_NAMES[c - 1] for _, _, _, c in chunk})
    place = rng.choice(_SPATIAL_WORDS)
    return f"place {len(chunk)} blocks ({', '.join(colors)}) near the {place}"


def generate_fixtures(seed: int, count: int, size_range: tuple[int, int] = (4, 12),
                      max_height: int = 3, include_canonical: bool = True) -> list[Task]:
    """Deterministic synthetic tasks: canonical fixtures plus ``count`` random ones."""
    lo, hi = size_range
    if lo < 1 or hi < lo:
        raise ValueError(f"bad size range {size_range}")
    if hi > N_CELLS:
        raise ValueError(f"size range {size_range} exceeds zone capacity {N_CELLS}")
    if max_height > ZONE_Y:
        raise ValueError(f"max_height {max_height} exceeds zone height {ZONE_Y}")
    rng = random.Random(seed)
    tasks: list[Task] = []
    if include_canonical:
        tasks += [l_shape_task(), box18_task()]
    for i in range(count):
        size = rng.randint(lo, hi)
        order = _random_structure(rng, size, max_height)
        grid = VoxelGrid.empty()
        subgoals: list[VoxelGrid] = []
        dialog: list[Utterance] = []
        utt_idx: list[int | None] = []
        pos = 0
        while pos < len(order):
            chunk = order[pos:pos + rng.randint(2, 5)]
            pos += len(chunk)
            for x, z, y, c in chunk:
                grid.cells[x, z, y] = c
            subgoals.append(grid.copy())
            utt_idx.append(len(dialog))
            dialog.append(Utterance("architect", _instruction(rng, chunk)))
        dialog.append(Utterance("builder", "done"))
        task = Task(id=f"fixture_{seed}_{i:03d}", dialog=dialog, target=grid.copy(),
                    subgoals=subgoals, subgoal_utterances=utt_idx)
        validate_task(task)
        tasks.append(task)
    return tasks
