import numpy as np
import pytest

from gridcraft import (
    BuilderEnv,
    ContinuousAction,
    ControlMode,
    DiscreteAction,
    EnvConfig,
    EpisodeFinished,
    HumanAction,
    InvalidTask,
    ModeMismatch,
    RewardConfig,
    VoxelGrid,
)
from gridcraft.agents import ScriptedBuilder
from gridcraft.environment import load_default_config
from gridcraft.tasks import Task, Utterance, l_shape_task


def make_env(**kwargs) -> BuilderEnv:
    kwargs.setdefault("render", False)
    return BuilderEnv(EnvConfig(**kwargs))


def run_scripted(env: BuilderEnv, task, seed=0):
    agent = ScriptedBuilder()
    obs = env.reset(task=task, mode="continuous", seed=seed)
    agent.reset(task, seed)
    total, results = 0, []
    while not env.done:
        result = env.step(agent.act(obs))
        obs = result.observation
        total += result.reward
        results.append(result)
    return total, results


def test_reset_initial_state(l_task):
    env = make_env()
    obs = env.reset(task=l_task, mode="discrete", seed=0)
    assert obs.zone.sum() == 0
    assert list(obs.pose) == [5.5, 0.0, 5.5, 0.0, 0.0]
    assert list(obs.inventory) == [20] * 6
    assert "architect:" in obs.dialog and "\n" in obs.dialog


def test_reset_determinism(l_task):
    env = make_env(render=True)
    a = env.reset(task=l_task, mode="discrete", seed=7)
    b = env.reset(task=l_task, mode="discrete", seed=7)
    assert np.array_equal(a.pov, b.pov)
    assert np.array_equal(a.zone, b.zone)
    assert np.array_equal(a.inventory, b.inventory)
    assert np.array_equal(a.pose, b.pose)
    assert a.dialog == b.dialog


def test_reset_empty_target_rejected():
    task = Task(id="empty", dialog=[Utterance("architect", "nothing")],
                target=VoxelGrid.empty())
    env = make_env()
    with pytest.raises(InvalidTask):
        env.reset(task=task, mode="discrete", seed=0)


def test_step_before_reset_raises(l_task):
    env = make_env()
    with pytest.raises(EpisodeFinished):
        env.step(DiscreteAction("noop"))


def test_wrong_action_variant_raises(l_task):
    env = make_env()
    env.reset(task=l_task, mode="discrete", seed=0)
    with pytest.raises(ModeMismatch):
        env.step(ContinuousAction())


def test_noop_step(l_task):
    env = make_env()
    env.reset(task=l_task, mode="discrete", seed=0)
    result = env.step(DiscreteAction("noop"))
    assert result.reward == 0
    assert not result.done
    assert result.info.termination_reason == "running"


def test_observation_shapes_every_step(l_task):
    for mode, action in [("discrete", DiscreteAction("step_north")),
                         ("continuous", ContinuousAction(shift=(0.1, 0.0, 0.0))),
                         ("human", HumanAction(move="forward"))]:
        env = make_env(render=True)
        obs = env.reset(task=l_task, mode=mode, seed=0)
        for _ in range(5):
            assert obs.pov.shape == (64, 64, 3) and obs.pov.dtype == np.uint8
            assert obs.inventory.shape == (6,)
            assert obs.zone.shape == (11, 11, 9)
            assert obs.pose.shape == (5,)
            assert isinstance(obs.dialog, str)
            result = env.step(action)
            obs = result.observation


def test_out_of_zone_terminates(l_task):
    env = make_env()
    env.reset(task=l_task, mode="continuous", seed=0)
    result = None
    for _ in range(7):   # fly east past x=11
        result = env.step(ContinuousAction(shift=(1.0, 0.0, 0.0)))
        if result.done:
            break
    assert result.done
    assert result.info.termination_reason == "out_of_zone"
    with pytest.raises(EpisodeFinished):
        env.step(ContinuousAction())


def test_step_limit(l_task):
    env = make_env(horizon=4)
    env.reset(task=l_task, mode="discrete", seed=0)
    for _ in range(3):
        assert not env.step(DiscreteAction("noop")).done
    result = env.step(DiscreteAction("noop"))
    assert result.done
    assert result.info.termination_reason == "step_limit"


def test_scripted_l_shape_telescoping(l_task):
    env = make_env()
    total, results = run_scripted(env, l_task)
    assert total == 10          # 2 x 5 blocks
    assert results[-1].reward == 2
    assert results[-1].info.termination_reason == "completed"
    assert env.grid == l_task.target


def test_scripted_box18_telescoping(box_task):
    env = make_env()
    total, results = run_scripted(env, box_task)
    assert total == 36
    assert results[-1].info.termination_reason == "completed"


def test_rewards_stay_in_band(box_task):
    env = make_env()
    _, results = run_scripted(env, box_task)
    assert all(r.reward in (-2, -1, 0, 1, 2) for r in results)


def test_misplace_and_remove_rewards(l_task):
    env = make_env()
    env.reset(task=l_task, mode="continuous", seed=0)
    # pitch down, fly away from the structure footprint, place a wrong block
    for _ in range(6):
        env.step(ContinuousAction(camera=(15.0, 0.0)))
    for _ in range(4):
        env.step(ContinuousAction(shift=(1.0, 0.0, 0.0)))
    env.step(ContinuousAction(shift=(0.0, 1.0, 0.0)))
    placed = env.step(ContinuousAction(use="place", hotbar=2))
    assert placed.reward == -1          # no structural progress
    broken = env.step(ContinuousAction(use="break"))
    assert broken.reward == 1           # cleanup refunds
    assert env.grid.nonair() == 0


def test_first_correct_block_pays_plus_two(l_task):
    env = make_env()
    env.reset(task=l_task, mode="continuous", seed=0)
    for _ in range(6):
        env.step(ContinuousAction(camera=(15.0, 0.0)))
    env.step(ContinuousAction(shift=(0.0, 1.0, 0.0)))
    result = env.step(ContinuousAction(use="place", hotbar=1))
    assert result.reward == 2   # any single blue block matches somewhere
    # breaking it walks the match back
    result = env.step(ContinuousAction(use="break"))
    assert result.reward == -2


def test_inventory_conservation(l_task):
    env = make_env()
    env.reset(task=l_task, mode="continuous", seed=0)
    for _ in range(6):
        env.step(ContinuousAction(camera=(15.0, 0.0)))
    env.step(ContinuousAction(shift=(0.0, 1.0, 0.0)))
    start = env.step(ContinuousAction()).observation.inventory.copy()
    env.step(ContinuousAction(use="place", hotbar=1))
    env.step(ContinuousAction(use="place", hotbar=2))   # occupied: miss
    obs = env.step(ContinuousAction()).observation
    placed_per_color = np.bincount(obs.zone.reshape(-1), minlength=7)[1:]
    assert np.array_equal(obs.inventory + placed_per_color, start)


def test_unbounded_inventory(l_task):
    env = make_env(inventory_count=1, inventory_unbounded=True)
    env.reset(task=l_task, mode="continuous", seed=0)
    for _ in range(6):
        env.step(ContinuousAction(camera=(15.0, 0.0)))
    env.step(ContinuousAction(shift=(0.0, 1.0, 0.0)))
    r1 = env.step(ContinuousAction(use="place", hotbar=1))
    assert r1.observation.zone.sum() > 0
    assert list(r1.observation.inventory) == [1] * 6   # counts frozen


def test_inventory_exhaustion_misses(l_task):
    env = make_env(inventory_count=0)
    env.reset(task=l_task, mode="continuous", seed=0)
    for _ in range(6):
        env.step(ContinuousAction(camera=(15.0, 0.0)))
    env.step(ContinuousAction(shift=(0.0, 1.0, 0.0)))
    result = env.step(ContinuousAction(use="place", hotbar=1))
    assert result.reward == 0
    assert result.observation.zone.sum() == 0


def test_tower_up_lifts_agent(l_task):
    env = make_env()
    env.reset(task=l_task, mode="discrete", seed=0)
    for _ in range(6):
        env.step(DiscreteAction("look_down"))
    result = env.step(DiscreteAction("place"))   # places into the feet cell
    assert result.observation.zone[5, 5, 0] == 1
    assert result.observation.pose[1] == 1.0     # lifted onto the new block


def test_custom_reward_config(l_task):
    env = BuilderEnv(EnvConfig(render=False,
                               reward=RewardConfig(closer=7, farther=-9,
                                                   misplace=-4, remove_misplaced=3)))
    env.reset(task=l_task, mode="continuous", seed=0)
    for _ in range(6):
        env.step(ContinuousAction(camera=(15.0, 0.0)))
    env.step(ContinuousAction(shift=(0.0, 1.0, 0.0)))
    assert env.step(ContinuousAction(use="place", hotbar=1)).reward == 7
    assert env.step(ContinuousAction(use="break")).reward == -9


def test_config_from_env_var(tmp_path, monkeypatch, l_task):
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text('{"horizon": 3, "render": false, "inventory_count": 9,'
                        ' "mode": "discrete", "reward": {"closer": 4}}')
    monkeypatch.setenv("GRIDCRAFT_CONFIG", str(cfg_path))
    cfg = load_default_config()
    assert cfg.horizon == 3
    assert cfg.mode == "discrete"
    assert cfg.inventory_count == 9
    assert cfg.reward.closer == 4
    env = BuilderEnv(cfg)
    obs = env.reset(task=l_task, mode="discrete", seed=0)
    assert list(obs.inventory) == [9] * 6
