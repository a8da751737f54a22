/**
 * Wire types for the environment's line-delimited JSON protocol.
 *
 * The zone crosses the boundary as a flat array of 1089 block ids in C
 * order of the (x, z, y) array: index (x * 11 + z) * 9 + y. Poses are
 * [x, y, z, pitch, yaw] in block units / degrees.
 */

export const ZONE_SHAPE: readonly [number, number, number] = [11, 11, 9];
export const ZONE_CELLS = 11 * 11 * 9;
export const POV_SHAPE: readonly [number, number, number] = [64, 64, 3];

export type Mode = 'human' | 'discrete' | 'continuous';

export interface HumanAction {
  mode: 'human';
  move: 'none' | 'forward' | 'back' | 'left' | 'right';
  jump: boolean;
  camera: [number, number];
  use: 'none' | 'place' | 'break';
  hotbar: number | null;
}

export interface DiscreteAction {
  mode: 'discrete';
  op: string;
}

export interface ContinuousAction {
  mode: 'continuous';
  shift: [number, number, number];
  camera: [number, number];
  use: 'none' | 'place' | 'break';
  hotbar: number | null;
}

export type Action = HumanAction | DiscreteAction | ContinuousAction;

export interface Observation {
  zone: number[];
  inventory: number[];
  pose: number[];
  dialog: string;
  pov_b64?: string;
}

export interface StepInfo {
  match_score: number;
  rotation: number;
  offset: [number, number, number];
  steps: number;
  termination_reason: string;
}

export interface StepOutcome {
  observation: Observation;
  reward: number;
  done: boolean;
  info: StepInfo;
}

export interface SpaceDescriptors {
  observation: {
    pov: number[];
    inventory: number[];
    zone: number[];
    pose: number[];
  };
  action_mode: string;
}

export interface EnvConfigOverrides {
  horizon?: number;
  inventory_count?: number;
  inventory_unbounded?: boolean;
  render?: boolean;
  reach?: number;
  camera_clamp?: number;
  reward?: {
    closer?: number;
    farther?: number;
    misplace?: number;
    remove_misplaced?: number;
  };
}

/** Block id at (x, z, y) of a flat zone array. */
export function zoneAt(zone: number[], x: number, z: number, y: number): number {
  return zone[(x * 11 + z) * 9 + y];
}

/** Parse the 9-layer text literal used by the task/episode files. */
export function parseGridLiteral(text: string): number[] {
  const layers = text
    .split('\n\n')
    .map((chunk) => chunk.trim())
    .filter((chunk) => chunk.length > 0);
  if (layers.length !== 9) {
    throw new Error(`grid literal must have 9 layers, got ${layers.length}`);
  }
  const flat = new Array<number>(ZONE_CELLS).fill(0);
  layers.forEach((layer, y) => {
    const rows = layer.split('\n').map((line) => line.trim());
    if (rows.length !== 11) {
      throw new Error(`layer ${y} must have 11 rows, got ${rows.length}`);
    }
    rows.forEach((row, z) => {
      if (!/^[0-6]{11}$/.test(row)) {
        throw new Error(`layer ${y} row ${z} is not 11 digits: ${row}`);
      }
      for (let x = 0; x < 11; x += 1) {
        flat[(x * 11 + z) * 9 + y] = Number(row[x]);
      }
    });
  });
  return flat;
}
