"""Episode lifecycle: reset/step, observation assembly and termination.

One environment instance runs one episode at a time and is intentionally
single-threaded; run several instances for parallelism. Everything a step
does is a deterministic function of (task, mode, config, action history),
which the replay verifier depends on.
"""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, replace

import numpy as np

from . import dynamics
from .dynamics import (
    ACTION_TYPES,
    Action,
    AgentPose,
    ControlMode,
    DiscreteAction,
    apply_motion,
    box_blocked,
    box_overlaps_cell,
    resolve_use,
    support_height,
)
from .errors import EpisodeFinished, InvalidTask, ModeMismatch
from .matching import MatchResult, MatchTable, RewardConfig, step_reward
from .render import POV_SIZE, render_pov
from .voxel import AIR, N_COLORS, ZONE_X, ZONE_Y, ZONE_Z, VoxelGrid

HORIZON_DEFAULTS = {
    ControlMode.DISCRETE: 500,
    ControlMode.CONTINUOUS: 2000,
    ControlMode.HUMAN: 5000,
}

SPAWN = (5.5, 0.0, 5.5)   # zone center, ground level

TERMINATION_RUNNING = "running"
TERMINATION_OUT_OF_ZONE = "out_of_zone"
TERMINATION_COMPLETED = "completed"
TERMINATION_STEP_LIMIT = "step_limit"


@dataclass
class EnvConfig:
    """Construction-time knobs. Defaults match the documented contract."""

    horizon: int | None = None          # None: per-mode default
    inventory_count: int = 20           # starting count per color
    inventory_unbounded: bool = False
    reward: RewardConfig = field(default_factory=RewardConfig)
    render: bool = False                # render the POV into observations
    reach: float = dynamics.DEFAULT_REACH
    camera_clamp: float = dynamics.CAMERA_CLAMP
    mode: str | None = None             # default control mode for runners

    @classmethod
    def from_dict(cls, data: dict) -> "EnvConfig":
        data = dict(data)
        reward = data.pop("reward", None)
        cfg = cls(**data)
        if cfg.mode is not None:
            cfg.mode = ControlMode(cfg.mode).value
        if reward is not None:
            cfg.reward = RewardConfig(**reward)
        return cfg

    @classmethod
    def from_file(cls, path: str) -> "EnvConfig":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


def load_default_config(path: str | None = None) -> EnvConfig:
    """Config from an explicit path, else $GRIDCRAFT_CONFIG, else defaults."""
    path = path or os.environ.get("GRIDCRAFT_CONFIG")
    if path:
        return EnvConfig.from_file(path)
    return EnvConfig()


@dataclass
class Observation:
    pov: np.ndarray          # (64, 64, 3) uint8; zeros when rendering is off
    inventory: np.ndarray    # (6,) int64 counts by block id 1..6
    zone: np.ndarray         # (11, 11, 9) uint8 snapshot
    dialog: str
    pose: np.ndarray         # (5,) float64: x, y, z, pitch, yaw


@dataclass
class StepInfo:
    match: MatchResult
    steps: int
    termination_reason: str


@dataclass
class StepResult:
    observation: Observation
    reward: int
    done: bool
    info: StepInfo


def dialog_text(task) -> str:
    return "\n".join(f"{u.speaker}: {u.text}" for u in task.dialog)


class BuilderEnv:
    """The block-building environment.

    Usage::

        env = BuilderEnv(config)
        obs = env.reset(task, mode=ControlMode.DISCRETE, seed=0)
        result = env.step(DiscreteAction("step_north"))
    """

    def __init__(self, config: EnvConfig | None = None,
                 task=None, mode: ControlMode | str | None = None):
        self.config = config or EnvConfig()
        self._default_task = task
        self._default_mode = ControlMode(mode) if mode is not None else None
        self._task = None
        self._started = False
        self._done = True

    # -- lifecycle ---------------------------------------------------------

    def reset(self, task=None, mode: ControlMode | str | None = None, seed: int = 0) -> Observation:
        task = task if task is not None else self._default_task
        mode = mode if mode is not None else self._default_mode
        if task is None:
            raise InvalidTask("no task given at construction or reset")
        if mode is None:
            raise InvalidTask("no control mode given at construction or reset")
        if task.target.nonair() == 0:
            raise InvalidTask(f"task {task.id!r} has an empty target")
        self._task = task
        self._mode = ControlMode(mode)
        self._seed = int(seed)
        self._horizon = self.config.horizon or HORIZON_DEFAULTS[self._mode]

        self._cells = task.initial.cells.copy()
        self._dialog = dialog_text(task)
        self._pose = AgentPose(*SPAWN, pitch=0.0, yaw=0.0)
        self._vel_y = 0.0
        self._selected = 1
        # with inventory_unbounded the counts are reported but never change
        self._counts = np.full(N_COLORS, self.config.inventory_count, dtype=np.int64)
        self._n_target = task.target.nonair()
        self._match = MatchTable(task.target)
        for x, z, y in np.argwhere(self._cells != AIR):
            self._match.add((x, z, y), int(self._cells[x, z, y]))
        self._match_result = self._match.best()
        self._nonair_built = int(np.count_nonzero(self._cells))
        self._steps = 0
        self._done = False
        self._termination = TERMINATION_RUNNING
        self._started = True
        return self._observe()

    def step(self, action: Action) -> StepResult:
        if not self._started:
            raise EpisodeFinished("reset() must be called before step()")
        if self._done:
            raise EpisodeFinished(f"episode already ended ({self._termination})")
        expected = ACTION_TYPES[self._mode]
        if not isinstance(action, expected):
            raise ModeMismatch(
                f"{type(action).__name__} sent to a {self._mode.value}-mode episode")

        self._steps += 1
        self._update_selection(action)
        self._pose, self._vel_y = apply_motion(
            self._pose, self._cells, action, self._mode, self._vel_y, self.config.camera_clamp)

        prev = self._match_result
        event = self._apply_use(action)
        reward = step_reward(prev, self._match_result, event, self.config.reward)

        if self._out_of_zone():
            self._done = True
            self._termination = TERMINATION_OUT_OF_ZONE
        elif self._completed():
            self._done = True
            self._termination = TERMINATION_COMPLETED
        elif self._steps >= self._horizon:
            self._done = True
            self._termination = TERMINATION_STEP_LIMIT

        info = StepInfo(self._match_result, self._steps, self._termination)
        return StepResult(self._observe(), reward, self._done, info)

    # -- step internals ----------------------------------------------------

    def _update_selection(self, action: Action) -> None:
        if isinstance(action, DiscreteAction):
            if action.op.startswith("select_"):
                self._selected = int(action.op[-1])
        elif action.hotbar is not None:
            self._selected = int(action.hotbar)

    def _use_kind(self, action: Action) -> str:
        if isinstance(action, DiscreteAction):
            return action.op if action.op in ("place", "break") else "none"
        return action.use

    def _apply_use(self, action: Action) -> str:
        use = self._use_kind(action)
        if use == "none":
            return "none"
        counts = None if self.config.inventory_unbounded else self._counts
        outcome = resolve_use(self._pose, self._cells, use, self._selected, counts,
                              self.config.reach)
        if outcome.kind == "miss":
            return "none"
        x, z, y = outcome.pos
        if outcome.kind == "broken":
            self._cells[x, z, y] = AIR
            self._match.remove(outcome.pos, outcome.block_id)
            self._nonair_built -= 1
            if not self.config.inventory_unbounded:
                self._counts[outcome.block_id - 1] += 1
            self._match_result = self._match.best()
            self._settle_after_edit()
            return "broken"

        # placement that overlaps the agent box lifts the agent onto the
        # new block; if there is no headroom the placement is a miss
        lift = box_overlaps_cell(self._pose, outcome.pos)
        if lift:
            trial = self._cells.copy()
            trial[x, z, y] = outcome.block_id
            if box_blocked(trial, self._pose.x, float(y + 1), self._pose.z):
                return "none"
        self._cells[x, z, y] = outcome.block_id
        self._match.add(outcome.pos, outcome.block_id)
        self._nonair_built += 1
        if not self.config.inventory_unbounded:
            self._counts[outcome.block_id - 1] -= 1
        if lift:
            self._pose = replace(self._pose, y=float(y + 1))
            self._vel_y = 0.0
        self._match_result = self._match.best()
        return "placed"

    def _settle_after_edit(self) -> None:
        # breaking support from under the agent drops it in non-flying modes
        if self._mode is ControlMode.CONTINUOUS:
            return
        support = support_height(self._cells, self._pose.x, self._pose.z, self._pose.y)
        if self._mode is ControlMode.DISCRETE and support < self._pose.y:
            self._pose = replace(self._pose, y=support)
        # human mode: gravity handles it on the following ticks

    def _out_of_zone(self) -> bool:
        p = self._pose
        return not (0.0 <= p.x <= ZONE_X and 0.0 <= p.z <= ZONE_Z and 0.0 <= p.y <= ZONE_Y)

    def _completed(self) -> bool:
        return (self._match_result.score == self._n_target
                and self._nonair_built == self._n_target)

    # -- observation -------------------------------------------------------

    def _observe(self) -> Observation:
        if self.config.render:
            pov = render_pov(self._cells, self._pose)
        else:
            pov = np.zeros((POV_SIZE, POV_SIZE, 3), dtype=np.uint8)
        return Observation(
            pov=pov,
            inventory=self._counts.copy(),
            zone=self._cells.copy(),
            dialog=self._dialog,
            pose=self._pose.as_array(),
        )

    def render_frame(self) -> np.ndarray:
        """Force-render the current POV regardless of config.render."""
        return render_pov(self._cells, self._pose)

    # -- introspection -----------------------------------------------------

    @property
    def done(self) -> bool:
        return self._done

    @property
    def termination(self) -> str:
        return self._termination

    @property
    def match_result(self) -> MatchResult:
        return self._match_result

    @property
    def steps(self) -> int:
        return self._steps

    @property
    def mode(self) -> ControlMode:
        return self._mode

    @property
    def grid(self) -> VoxelGrid:
        return VoxelGrid(self._cells.copy())
