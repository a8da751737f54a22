"""Reference agents for the run command: random, scripted optimal, external.

The scripted builder flies (continuous mode), hovers one block above the
column it is working on, looks straight down and places bottom-up, so
every placement extends the target structure in place and earns the
maximal +2. It handles column-supported structures (every block rests on
the ground or on another block), which is what the fixture generator
produces.
"""
from __future__ import annotations

import json
import random
import shlex
import subprocess

from .dynamics import (
    ContinuousAction,
    ControlMode,
    DiscreteAction,
    HumanAction,
)
from .environment import Observation
from .errors import GridcraftError, ValidationError
from .tasks import Task, action_from_json
from .voxel import AIR, N_COLORS, ZONE_Y


class Agent:
    def reset(self, task: Task, seed: int) -> None:
        raise NotImplementedError

    def act(self, obs: Observation):
        raise NotImplementedError

    def close(self) -> None:
        pass


class RandomAgent(Agent):
    """Uniform-ish action noise, deterministic for a given seed."""

    _DISCRETE_WEIGHTS = {
        "noop": 2, "step_north": 8, "step_south": 8, "step_east": 8, "step_west": 8,
        "turn_left": 4, "turn_right": 4, "look_up": 4, "look_down": 4,
        "jump": 2, "place": 12, "break": 4,
        "select_1": 1, "select_2": 1, "select_3": 1,
        "select_4": 1, "select_5": 1, "select_6": 1,
    }

    def __init__(self, mode: ControlMode):
        self.mode = ControlMode(mode)
        self._rng = random.Random(0)

    def reset(self, task: Task, seed: int) -> None:
        self._rng = random.Random(seed)

    def _use(self, rng) -> str:
        return rng.choices(("none", "place", "break"), weights=(6, 3, 1))[0]

    def _hotbar(self, rng):
        return rng.randint(1, N_COLORS) if rng.random() < 0.3 else None

    def act(self, obs: Observation):
        rng = self._rng
        if self.mode is ControlMode.DISCRETE:
            ops = list(self._DISCRETE_WEIGHTS)
            return DiscreteAction(rng.choices(ops, weights=[self._DISCRETE_WEIGHTS[o] for o in ops])[0])
        camera = (rng.uniform(-15.0, 15.0), rng.uniform(-15.0, 15.0))
        if self.mode is ControlMode.CONTINUOUS:
            shift = (rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0))
            return ContinuousAction(shift=shift, camera=camera, use=self._use(rng),
                                    hotbar=self._hotbar(rng))
        move = rng.choices(("none", "forward", "back", "left", "right"),
                           weights=(2, 6, 2, 2, 2))[0]
        return HumanAction(move=move, jump=rng.random() < 0.15, camera=camera,
                           use=self._use(rng), hotbar=self._hotbar(rng))


def _column_plan(target_cells) -> list[tuple[int, int, list[int]]]:
    """Per-column bottom-up color stacks; rejects unsupported structures."""
    columns = []
    for x in range(target_cells.shape[0]):
        for z in range(target_cells.shape[1]):
            stack = [int(v) for v in target_cells[x, z, :]]
            top = max((y + 1 for y, v in enumerate(stack) if v != AIR), default=0)
            if top == 0:
                continue
            colors = stack[:top]
            if AIR in colors:
                raise ValidationError(
                    f"column ({x}, {z}) has a floating block; the scripted "
                    "builder only handles column-supported structures")
            columns.append((x, z, colors))
    return columns


def scripted_plan(task: Task) -> list[ContinuousAction]:
    """Continuous-mode action list that builds the target optimally."""
    if task.initial.nonair() != 0:
        raise ValidationError("the scripted builder expects an empty initial zone")
    columns = _column_plan(task.target.cells)
    top = max(len(colors) for _, _, colors in columns)
    if top + 1 > ZONE_Y:
        raise ValidationError("structure too tall for the scripted builder's hover path")

    plan: list[ContinuousAction] = []
    for _ in range(6):   # pitch from 0 to straight down, 15 degrees per tick
        plan.append(ContinuousAction(camera=(15.0, 0.0)))

    def fly(value: float, target: float, axis: int):
        while value != target:
            d = max(-1.0, min(1.0, target - value))
            shift = [0.0, 0.0, 0.0]
            shift[axis] = d
            plan.append(ContinuousAction(shift=tuple(shift)))
            value += d
        return value

    x, y, z = 5.5, 0.0, 5.5
    travel = 1.0
    for cx, cz, colors in sorted(columns):
        y = fly(y, travel, 1)
        x = fly(x, cx + 0.5, 0)
        z = fly(z, cz + 0.5, 2)
        y = fly(y, 1.0, 1)
        for i, color in enumerate(colors):
            plan.append(ContinuousAction(use="place", hotbar=color))
            if i + 1 < len(colors):
                plan.append(ContinuousAction(shift=(0.0, 1.0, 0.0)))
                y += 1.0
        travel = max(travel, len(colors) + 1.0)
    return plan


class ScriptedBuilder(Agent):
    """Optimal builder: earns exactly 2 x nonair(target) and completes."""

    def __init__(self, mode: ControlMode = ControlMode.CONTINUOUS):
        if ControlMode(mode) is not ControlMode.CONTINUOUS:
            raise ValidationError("the scripted builder only runs in continuous mode")
        self.mode = ControlMode.CONTINUOUS
        self._plan: list[ContinuousAction] = []
        self._at = 0

    def reset(self, task: Task, seed: int) -> None:
        self._plan = scripted_plan(task)
        self._at = 0

    def act(self, obs: Observation):
        if self._at >= len(self._plan):
            return ContinuousAction()   # plan exhausted; idle until the horizon
        action = self._plan[self._at]
        self._at += 1
        return action


class ExternalAgent(Agent):
    """Child process speaking line-delimited JSON on its standard streams.

    The runner writes one observation object per step and reads one action
    object back; see the README protocol section.
    """

    def __init__(self, mode: ControlMode, command: str):
        self.mode = ControlMode(mode)
        self._proc = subprocess.Popen(
            shlex.split(command), stdin=subprocess.PIPE, stdout=subprocess.PIPE,
            text=True, bufsize=1)

    def send(self, message: dict) -> None:
        if self._proc.poll() is not None:
            raise GridcraftError("external agent exited prematurely")
        self._proc.stdin.write(json.dumps(message) + "\n")
        self._proc.stdin.flush()

    def reset(self, task: Task, seed: int) -> None:
        pass   # the runner sends explicit reset messages

    def act(self, obs: Observation):
        line = self._proc.stdout.readline()
        if not line:
            raise GridcraftError("external agent closed its stdout")
        return action_from_json(json.loads(line))

    def close(self) -> None:
        if self._proc.poll() is None:
            try:
                self.send({"type": "shutdown"})
            except GridcraftError:
                pass
            try:
                self._proc.wait(timeout=5)
            except subprocess.TimeoutExpired:
                self._proc.kill()


def make_agent(name: str, mode: ControlMode, command: str | None = None) -> Agent:
    if name == "random":
        return RandomAgent(mode)
    if name == "scripted_optimal":
        return ScriptedBuilder(mode)
    if name == "external":
        if not command:
            raise ValueError("external agent needs --agent-cmd")
        return ExternalAgent(mode, command)
    raise ValueError(f"unknown agent {name!r}")
