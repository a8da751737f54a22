/**
 * Binding parity: seed-matched episodes replayed through the client must
 * reproduce the CLI's reward streams and final grids exactly, and the
 * space descriptors must carry the documented shapes.
 */
import { execFileSync } from 'node:child_process';
import { mkdtempSync, readFileSync, writeFileSync } from 'node:fs';
import { tmpdir } from 'node:os';
import { join } from 'node:path';
import { afterAll, beforeAll, describe, expect, it } from 'vitest';

import { GridcraftClient } from '../src/client.js';
import { bleuScores } from '../src/metrics.js';
import type { Action, Mode } from '../src/protocol.js';
import { parseGridLiteral } from '../src/protocol.js';

const PYTHON = process.env.GRIDCRAFT_PYTHON ?? 'python3';

interface LoggedEpisode {
  index: number;
  taskId: string;
  mode: Mode;
  seed: number;
  actions: Action[];
  rewards: number[];
  matchScores: number[];
  termination: string;
  finalGrid: number[];
}

function parseEpisodes(path: string): LoggedEpisode[] {
  const episodes: LoggedEpisode[] = [];
  let current: LoggedEpisode | null = null;
  for (const line of readFileSync(path, 'utf-8').split('\n')) {
    if (!line.trim()) continue;
    const obj = JSON.parse(line);
    if (obj.type === 'episode') {
      current = {
        index: obj.index, taskId: obj.task_id, mode: obj.mode, seed: obj.seed,
        actions: [], rewards: [], matchScores: [], termination: '', finalGrid: [],
      };
    } else if (obj.type === 'step') {
      current!.actions.push(obj.action);
      current!.rewards.push(obj.reward);
      current!.matchScores.push(obj.match_score);
    } else if (obj.type === 'end') {
      current!.termination = obj.termination;
      current!.finalGrid = parseGridLiteral(obj.final_grid);
      episodes.push(current!);
      current = null;
    }
  }
  return episodes;
}

describe('binding parity', () => {
  const dir = mkdtempSync(join(tmpdir(), 'gridcraft-parity-'));
  const tasksFile = join(dir, 'tasks.jsonl');
  const configFile = join(dir, 'config.json');
  let client: GridcraftClient;

  beforeAll(() => {
    execFileSync(PYTHON, ['-m', 'gridcraft', 'gen-fixtures', '--seed', '7',
      '--count', '3', '--out', tasksFile]);
    writeFileSync(configFile, JSON.stringify({ horizon: 60, render: false }));
    for (const [mode, out] of [['discrete', 'd.jsonl'], ['continuous', 'c.jsonl']]) {
      execFileSync(PYTHON, ['-m', 'gridcraft', 'run', '--tasks', tasksFile,
        '--agent', 'random', '--mode', mode, '--episodes', '10', '--seed',
        mode === 'discrete' ? '100' : '200', '--out', join(dir, out),
        '--config', configFile]);
    }
    client = new GridcraftClient({ tasksFile, configFile, pythonCommand: [PYTHON, '-m', 'gridcraft'] });
  });

  afterAll(async () => {
    await client.shutdown();
  });

  it('exposes the documented space descriptors', async () => {
    const env = await client.make({ taskId: 'fixture_l_shape_5', mode: 'discrete' });
    expect(env.spaces.observation.zone).toEqual([11, 11, 9]);
    expect(env.spaces.observation.pov).toEqual([64, 64, 3]);
    expect(env.spaces.observation.inventory).toEqual([6]);
    expect(env.spaces.observation.pose).toEqual([5]);
    expect(env.spaces.action_mode).toBe('discrete');
    await env.close();
  });

  it('replays 20 seed-matched episodes with identical rewards and grids', async () => {
    const episodes = [
      ...parseEpisodes(join(dir, 'd.jsonl')),
      ...parseEpisodes(join(dir, 'c.jsonl')),
    ];
    expect(episodes.length).toBe(20);
    for (const episode of episodes) {
      const env = await client.make({ taskId: episode.taskId, mode: episode.mode });
      let obs = await env.reset(episode.seed);
      expect(obs.zone.length).toBe(1089);
      const rewards: number[] = [];
      const matchScores: number[] = [];
      let done = false;
      let finalZone = obs.zone;
      for (const action of episode.actions) {
        const out = await env.step(action);
        rewards.push(out.reward);
        matchScores.push(out.info.match_score);
        done = out.done;
        finalZone = out.observation.zone;
      }
      expect(rewards).toEqual(episode.rewards);
      expect(matchScores).toEqual(episode.matchScores);
      expect(done).toBe(true);
      expect(finalZone).toEqual(episode.finalGrid);
      await env.close();
    }
  }, 180_000);

  it('fails cleanly on a closed handle and after done', async () => {
    const env = await client.make({ taskId: 'fixture_l_shape_5', mode: 'discrete' });
    await env.reset(0);
    await env.close();
    await expect(env.reset(0)).rejects.toThrow(/closed/);
    await expect(async () => {
      await client.request({ cmd: 'step', handle: env.id,
        action: { mode: 'discrete', op: 'noop' } });
    }).rejects.toThrow(/handle/);
    // stepping a finished episode surfaces the server-side error
    const env2 = await client.make({
      taskId: 'fixture_l_shape_5', mode: 'continuous',
      config: { horizon: 1, render: false },
    });
    await env2.reset(0);
    await env2.step({ mode: 'continuous', shift: [0, 0, 0], camera: [0, 0], use: 'none', hotbar: null });
    await expect(async () => {
      await env2.step({ mode: 'continuous', shift: [0, 0, 0], camera: [0, 0], use: 'none', hotbar: null });
    }).rejects.toThrow(/EpisodeFinished/);
    await env2.close();
  });

  it('delivers a 64x64x3 8-bit POV when rendering is on', async () => {
    const env = await client.make({
      taskId: 'fixture_box_18', mode: 'discrete',
      config: { render: true, horizon: 5 },
    });
    const obs = await env.reset(0);
    expect(obs.pov_b64).toBeTypeOf('string');
    const raw = Buffer.from(obs.pov_b64!, 'base64');
    expect(raw.length).toBe(64 * 64 * 3);
    await env.close();
  });

  it('keeps alternately stepped handles independent', async () => {
    const a = await client.make({ taskId: 'fixture_l_shape_5', mode: 'discrete' });
    const b = await client.make({ taskId: 'fixture_l_shape_5', mode: 'discrete' });
    await a.reset(0);
    await b.reset(0);
    const east: Action = { mode: 'discrete', op: 'step_east' };
    const noop: Action = { mode: 'discrete', op: 'noop' };
    await a.step(east);
    const stillB = await b.step(noop);
    const movedA = await a.step(noop);
    expect(movedA.observation.pose[0]).toBe(6.5);
    expect(stillB.observation.pose[0]).toBe(5.5);
    await a.close();
    await b.close();
  });

  it('matches the CLI architect scores bit-for-bit on a shared corpus', async () => {
    const rows = [
      ['c0', 'place a blue block', 'place a red block'],
      ['c1', 'now build a tall column on the left', 'build a tall tower on the left side'],
      ['c2', 'okay done', 'okay all done'],
    ];
    const tsv = join(dir, 'arch.tsv');
    writeFileSync(tsv, rows.map((r) => r.join('\t')).join('\n') + '\n');
    const report = JSON.parse(execFileSync(PYTHON, ['-m', 'gridcraft', 'eval-architect',
      '--tsv', tsv], { encoding: 'utf-8' }));
    const scores = bleuScores(rows.map((r) => r[1]), rows.map((r) => r[2]));
    expect(Math.abs(scores[0] - report.bleu.bleu_1)).toBeLessThan(1e-12);
    expect(Math.abs(scores[1] - report.bleu.bleu_2)).toBeLessThan(1e-12);
    expect(Math.abs(scores[2] - report.bleu.bleu_3)).toBeLessThan(1e-12);
    expect(Math.abs(scores[3] - report.bleu.bleu_4)).toBeLessThan(1e-12);
  });
});
