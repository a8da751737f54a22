/**
 * GridcraftClient - gym-style access to the environment over its stdio
 * JSON-lines protocol.
 *
 * The client spawns one `gridcraft serve` process and multiplexes any
 * number of environment handles over it; requests carry an id echoed by
 * the matching response. One handle corresponds to one environment
 * instance on the server; closed handles fail locally.
 *
 * Usage:
 *   const client = new GridcraftClient({ tasksFile: 'tasks.jsonl' });
 *   const env = await client.make({ taskId: 'fixture_l_shape_5', mode: 'discrete' });
 *   let obs = await env.reset(0);
 *   const out = await env.step({ mode: 'discrete', op: 'step_north' });
 *   await client.shutdown();
 */
import { spawn, type ChildProcessByStdio } from 'node:child_process';
import { createInterface, type Interface } from 'node:readline';
import type { Readable, Writable } from 'node:stream';

import type {
  Action,
  EnvConfigOverrides,
  Mode,
  Observation,
  SpaceDescriptors,
  StepOutcome,
} from './protocol.js';

export interface ClientOptions {
  tasksFile: string;
  /** Command used to start the server; defaults to python3 -m gridcraft. */
  pythonCommand?: string[];
  configFile?: string;
}

interface Pending {
  resolve: (value: Record<string, unknown>) => void;
  reject: (error: Error) => void;
}

export class RemoteError extends Error {
  constructor(public readonly kind: string, message: string) {
    super(`${kind}: ${message}`);
    this.name = 'RemoteError';
  }
}

export class GridcraftClient {
  private proc: ChildProcessByStdio<Writable, Readable, null>;
  private lines: Interface;
  private pending = new Map<number, Pending>();
  private nextId = 1;
  private closed = false;

  constructor(options: ClientOptions) {
    const command = options.pythonCommand ?? ['python3', '-m', 'gridcraft'];
    const args = [...command.slice(1), 'serve', '--tasks', options.tasksFile];
    if (options.configFile) {
      args.push('--config', options.configFile);
    }
    this.proc = spawn(command[0], args, { stdio: ['pipe', 'pipe', 'inherit'] });
    this.lines = createInterface({ input: this.proc.stdout });
    this.lines.on('line', (line) => this.onLine(line));
    this.proc.on('exit', () => this.failAll(new Error('server process exited')));
  }

  private onLine(line: string): void {
    let message: Record<string, unknown>;
    try {
      message = JSON.parse(line) as Record<string, unknown>;
    } catch {
      return; // stray non-JSON output; ignore
    }
    const id = message.id as number | undefined;
    if (id === undefined || !this.pending.has(id)) {
      return;
    }
    const waiter = this.pending.get(id)!;
    this.pending.delete(id);
    if (message.ok === false) {
      waiter.reject(new RemoteError(String(message.error), String(message.message)));
      return;
    }
    waiter.resolve(message);
  }

  private failAll(error: Error): void {
    for (const waiter of this.pending.values()) {
      waiter.reject(error);
    }
    this.pending.clear();
  }

  request(body: Record<string, unknown>): Promise<Record<string, unknown>> {
    if (this.closed) {
      return Promise.reject(new Error('client is shut down'));
    }
    const id = this.nextId;
    this.nextId += 1;
    const payload = JSON.stringify({ id, ...body });
    return new Promise((resolve, reject) => {
      this.pending.set(id, { resolve, reject });
      this.proc.stdin.write(payload + '\n', (err) => {
        if (err) {
          this.pending.delete(id);
          reject(err);
        }
      });
    });
  }

  /** Ids of the tasks the server loaded. */
  async tasks(): Promise<string[]> {
    const reply = await this.request({ cmd: 'tasks' });
    return reply.tasks as string[];
  }

  async make(options: {
    taskId?: string;
    taskIndex?: number;
    mode: Mode;
    config?: EnvConfigOverrides;
  }): Promise<EnvHandle> {
    const body: Record<string, unknown> = { cmd: 'make', mode: options.mode };
    if (options.taskId !== undefined) body.task_id = options.taskId;
    if (options.taskIndex !== undefined) body.task_index = options.taskIndex;
    if (options.config !== undefined) body.config = options.config;
    const reply = await this.request(body);
    return new EnvHandle(
      this,
      reply.handle as number,
      reply.task_id as string,
      reply.spaces as unknown as SpaceDescriptors,
    );
  }

  async shutdown(): Promise<void> {
    if (this.closed) return;
    this.closed = true;
    try {
      await Promise.race([
        this.request0({ cmd: 'shutdown' }),
        new Promise((resolve) => setTimeout(resolve, 2000)),
      ]);
    } finally {
      this.proc.kill();
    }
  }

  private request0(body: Record<string, unknown>): Promise<Record<string, unknown>> {
    const id = this.nextId;
    this.nextId += 1;
    return new Promise((resolve, reject) => {
      this.pending.set(id, { resolve, reject });
      this.proc.stdin.write(JSON.stringify({ id, ...body }) + '\n', (err) => {
        if (err) reject(err);
      });
    });
  }
}

export class EnvHandle {
  private open = true;

  constructor(
    private readonly client: GridcraftClient,
    readonly id: number,
    readonly taskId: string,
    readonly spaces: SpaceDescriptors,
  ) {}

  private ensureOpen(): void {
    if (!this.open) {
      throw new Error(`handle ${this.id} is closed`);
    }
  }

  async reset(seed = 0): Promise<Observation> {
    this.ensureOpen();
    const reply = await this.client.request({ cmd: 'reset', handle: this.id, seed });
    return reply.observation as unknown as Observation;
  }

  async step(action: Action): Promise<StepOutcome> {
    this.ensureOpen();
    const reply = await this.client.request({ cmd: 'step', handle: this.id, action });
    return reply as unknown as StepOutcome;
  }

  async close(): Promise<void> {
    if (!this.open) return;
    this.open = false;
    await this.client.request({ cmd: 'close', handle: this.id });
  }
}
