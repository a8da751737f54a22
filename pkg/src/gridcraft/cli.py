"""Operator entry points.

Exit codes: 0 success, 1 evaluation/replay mismatch, 2 usage or input
errors. Every command is deterministic given its inputs and seeds; the
env var GRIDCRAFT_CONFIG supplies default environment configuration and
``--config`` overrides it per invocation.
"""
from __future__ import annotations

import json
import sys
from pathlib import Path

import click
import numpy as np
from PIL import Image

from .agents import ExternalAgent, make_agent
from .dynamics import ControlMode
from .environment import BuilderEnv, EnvConfig, load_default_config
from .errors import GridcraftError, MismatchError, ParseError
from .metrics import (
    KeywordLexicon,
    architect_report,
    builder_scores,
    normalized_hamming,
)
from .protocol import observation_to_json
from .serve import serve_loop
from .tasks import (
    EpisodeRecord,
    EpisodeStep,
    Task,
    generate_fixtures,
    load_episodes,
    load_tasks,
    save_episodes,
    save_tasks,
)
from .voxel import VoxelGrid

MODE_CHOICES = click.Choice(["human", "discrete", "continuous"])


def _load_config(path: str | None) -> EnvConfig:
    try:
        return load_default_config(path)
    except (OSError, TypeError, ValueError) as exc:
        raise click.ClickException(f"bad config: {exc}") from exc


def _fail_usage(message: str):
    click.echo(f"error: {message}", err=True)
    sys.exit(2)


@click.group()
def main():
    """Voxel building-zone environment: run, replay, evaluate."""


def _run_episode(env: BuilderEnv, agent, task: Task, mode: ControlMode,
                 index: int, seed: int, frames_dir: Path | None) -> EpisodeRecord:
    obs = env.reset(task=task, mode=mode, seed=seed)
    agent.reset(task, seed)
    if isinstance(agent, ExternalAgent):
        agent.send({"type": "reset", "episode": index, "task_id": task.id,
                    "mode": mode.value, "seed": seed,
                    "observation": observation_to_json(obs)})
    steps: list[EpisodeStep] = []
    total = 0
    while not env.done:
        action = agent.act(obs)
        result = env.step(action)
        obs = result.observation
        total += result.reward
        steps.append(EpisodeStep(action, result.reward, result.info.match.score))
        if isinstance(agent, ExternalAgent) and not env.done:
            agent.send({"type": "observation", "episode": index, "step": env.steps,
                        "reward": result.reward, "done": False,
                        "observation": observation_to_json(obs)})
        if frames_dir is not None:
            frame = env.render_frame()
            Image.fromarray(frame).save(
                frames_dir / f"ep{index:03d}_step{len(steps):05d}.png")
    final = env.grid
    rho = normalized_hamming(final, task.target)
    if isinstance(agent, ExternalAgent):
        agent.send({"type": "episode_end", "episode": index, "total_reward": total,
                    "termination": env.termination})
    return EpisodeRecord(
        index=index, task_id=task.id, mode=mode, seed=seed, steps=steps,
        final_grid=final, termination=env.termination, total_reward=total,
        rho=rho, success=env.termination == "completed")


@main.command()
@click.option("--tasks", "tasks_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--task-id", default=None, help="Run only this task id.")
@click.option("--mode", type=MODE_CHOICES, default=None,
              help="Control mode; falls back to the config file, then continuous.")
@click.option("--agent", "agent_name",
              type=click.Choice(["random", "scripted_optimal", "external"]),
              default="random", show_default=True)
@click.option("--agent-cmd", default=None,
              help="Command line for --agent external (line-JSON protocol).")
@click.option("--episodes", "n_episodes", type=int, default=1, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
@click.option("--frames-dir", default=None, type=click.Path(file_okay=False))
@click.option("--render/--no-render", "render", default=None,
              help="Render POV during the run (default: config file setting, else off).")
@click.option("--config", "config_path", default=None,
              type=click.Path(exists=True, dir_okay=False))
def run(tasks_path, task_id, mode, agent_name, agent_cmd, n_episodes, seed,
        out_path, frames_dir, render, config_path):
    """Run N episodes and write an episodes.jsonl log."""
    if n_episodes < 1:
        _fail_usage("--episodes must be >= 1")
    try:
        tasks = load_tasks(tasks_path)
    except GridcraftError as exc:
        _fail_usage(str(exc))
    if task_id is not None:
        tasks = [t for t in tasks if t.id == task_id]
        if not tasks:
            _fail_usage(f"task id {task_id!r} not found in {tasks_path}")
    if not tasks:
        _fail_usage(f"no tasks in {tasks_path}")
    config = _load_config(config_path)
    if render is None:
        render = config.render
    config.render = render or frames_dir is not None
    mode = ControlMode(mode or config.mode or "continuous")
    frames = Path(frames_dir) if frames_dir else None
    if frames:
        frames.mkdir(parents=True, exist_ok=True)

    env = BuilderEnv(config)
    try:
        agent = make_agent(agent_name, mode, agent_cmd)
    except (ValueError, GridcraftError) as exc:
        _fail_usage(str(exc))
    records = []
    try:
        for i in range(n_episodes):
            task = tasks[i % len(tasks)]
            records.append(_run_episode(env, agent, task, mode, i, seed + i, frames))
    except GridcraftError as exc:
        _fail_usage(str(exc))
    finally:
        agent.close()
    save_episodes(records, out_path)
    click.echo(f"wrote {len(records)} episode(s) to {out_path}")


@main.command()
@click.option("--tasks", "tasks_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--episodes", "episodes_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--frames-dir", default=None, type=click.Path(file_okay=False))
@click.option("--config", "config_path", default=None,
              type=click.Path(exists=True, dir_okay=False))
def replay(tasks_path, episodes_path, frames_dir, config_path):
    """Re-simulate a log and verify its reward stream bit-exactly."""
    try:
        tasks = {t.id: t for t in load_tasks(tasks_path)}
        records = load_episodes(episodes_path)
    except GridcraftError as exc:
        _fail_usage(str(exc))
    config = _load_config(config_path)
    config.render = frames_dir is not None
    frames = Path(frames_dir) if frames_dir else None
    if frames:
        frames.mkdir(parents=True, exist_ok=True)
    env = BuilderEnv(config)
    divergences = 0
    first_message = None
    for rec in records:
        task = tasks.get(rec.task_id)
        if task is None:
            _fail_usage(f"episode {rec.index}: task {rec.task_id!r} not in {tasks_path}")
        env.reset(task=task, mode=rec.mode, seed=rec.seed)
        for t, step in enumerate(rec.steps):
            result = env.step(step.action)
            if result.reward != step.reward or result.info.match.score != step.match_score:
                divergences += 1
                if first_message is None:
                    first_message = (
                        f"episode {rec.index} step {t}: replay gave reward "
                        f"{result.reward} / match {result.info.match.score}, "
                        f"log says {step.reward} / {step.match_score}")
                break
            if frames is not None:
                Image.fromarray(env.render_frame()).save(
                    frames / f"ep{rec.index:03d}_step{t + 1:05d}.png")
        else:
            if env.termination != rec.termination:
                divergences += 1
                if first_message is None:
                    first_message = (f"episode {rec.index}: termination "
                                     f"{env.termination!r} != logged {rec.termination!r}")
            elif env.grid != rec.final_grid:
                divergences += 1
                if first_message is None:
                    first_message = f"episode {rec.index}: final grid differs"
    click.echo(f"{divergences} divergences in {len(records)} episode(s)")
    if divergences:
        raise MismatchError(first_message)


@main.command("eval-builder")
@click.option("--episodes", "episodes_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--tasks", "tasks_path", default=None,
              type=click.Path(exists=True, dir_okay=False),
              help="Recompute rho from final grids instead of trusting the log.")
@click.option("--out", "out_path", default=None, type=click.Path(dir_okay=False))
def eval_builder(episodes_path, tasks_path, out_path):
    """Builder-track score report {S_r, S_s, S_c, N} from an episode log."""
    try:
        records = load_episodes(episodes_path)
    except GridcraftError as exc:
        _fail_usage(str(exc))
    if not records:
        _fail_usage(f"no episodes in {episodes_path}")
    rhos = [r.rho for r in records]
    if tasks_path:
        try:
            tasks = {t.id: t for t in load_tasks(tasks_path)}
            rhos = [normalized_hamming(r.final_grid, tasks[r.task_id].target)
                    for r in records]
        except KeyError as exc:
            _fail_usage(f"episode references unknown task {exc}")
        except GridcraftError as exc:
            _fail_usage(str(exc))
    scores = builder_scores(
        [r.total_reward for r in records],
        [r.success for r in records],
        rhos,
    )
    payload = json.dumps(scores.as_dict(), indent=2)
    click.echo(payload)
    if out_path:
        Path(out_path).write_text(payload + "\n", encoding="utf-8")


@main.command("eval-architect")
@click.option("--tsv", "tsv_path", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="Tab-separated rows: context-id, candidate, reference.")
@click.option("--lexicon", "lexicon_path", default=None,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--sentence-level", is_flag=True, default=False,
              help="Average per-sentence BLEU instead of pooling the corpus.")
@click.option("--out", "out_path", default=None, type=click.Path(dir_okay=False))
def eval_architect(tsv_path, lexicon_path, sentence_level, out_path):
    """Architect-track scores: BLEU-1..4 and keyword precision/recall."""
    candidates, references = [], []
    with open(tsv_path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                _fail_usage(f"{tsv_path}:{lineno}: expected 3 tab-separated columns")
            candidates.append(parts[1])
            references.append(parts[2])
    if not candidates:
        _fail_usage(f"{tsv_path}: no rows")
    lexicon = KeywordLexicon.from_file(lexicon_path) if lexicon_path else None
    report = architect_report(candidates, references, lexicon, sentence_level)
    payload = json.dumps(report, indent=2)
    click.echo(payload)
    if out_path:
        Path(out_path).write_text(payload + "\n", encoding="utf-8")


@main.command("gen-fixtures")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--count", type=int, default=5, show_default=True)
@click.option("--min-size", type=int, default=4, show_default=True)
@click.option("--max-size", type=int, default=12, show_default=True)
@click.option("--max-height", type=int, default=3, show_default=True)
@click.option("--no-canonical", is_flag=True, default=False,
              help="Skip the 5-block L and 18-block box fixtures.")
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
def gen_fixtures(seed, count, min_size, max_size, max_height, no_canonical, out_path):
    """Write deterministic synthetic tasks to a tasks.jsonl file."""
    try:
        tasks = generate_fixtures(seed, count, (min_size, max_size), max_height,
                                  include_canonical=not no_canonical)
    except ValueError as exc:
        _fail_usage(str(exc))
    save_tasks(tasks, out_path)
    click.echo(f"wrote {len(tasks)} task(s) to {out_path}")


@main.command()
@click.option("--tasks", "tasks_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--config", "config_path", default=None,
              type=click.Path(exists=True, dir_okay=False))
def serve(tasks_path, config_path):
    """Serve environments over line-delimited JSON on stdio."""
    try:
        tasks = load_tasks(tasks_path)
    except GridcraftError as exc:
        _fail_usage(str(exc))
    serve_loop(tasks, _load_config(config_path))


def cli_entry() -> int:
    try:
        main.main(standalone_mode=False)
    except click.UsageError as exc:
        click.echo(f"error: {exc.format_message()}", err=True)
        return 2
    except click.ClickException as exc:
        exc.show()
        return 2
    except MismatchError as exc:
        click.echo(f"mismatch: {exc}", err=True)
        return 1
    except (ParseError, GridcraftError) as exc:
        click.echo(f"error: {exc}", err=True)
        return 2
    except click.exceptions.Abort:
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(cli_entry())
