/**
 * Crop extraction and augmentation for training on map/occupancy pairs.
 *
 * Inputs are one-hot semantic stacks (or a single walkability channel in
 * binary mode); targets are the matching occupancy crops rescaled to [0, 1]
 * by each crop's own maximum so they suit a sigmoid + cross-entropy head.
 */

import type { OccupancyGrid, SemanticMap } from "./formats.js";

export type Mode = "semantic" | "binary";

export interface CropPair {
  input: Float32Array; // crop*crop*channels, channel-last
  target: Float32Array; // crop*crop
}

// Deterministic 32-bit PRNG for crop positions.
export function mulberry32(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a |= 0;
    a = (a + 0x6d2b79f5) | 0;
    let t = Math.imul(a ^ (a >>> 15), 1 | a);
    t = (t + Math.imul(t ^ (t >>> 7), 61 | t)) ^ t;
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

export function inputChannels(map: SemanticMap, mode: Mode): number {
  return mode === "binary" ? 1 : map.classes.names.length;
}

/** One-hot class stack, or the walkability indicator in binary mode. */
export function mapToTensorData(map: SemanticMap, mode: Mode): Float32Array {
  const k = inputChannels(map, mode);
  const out = new Float32Array(map.width * map.height * k);
  for (let i = 0; i < map.cells.length; i++) {
    if (mode === "binary") {
      out[i] = map.classes.walkable[map.cells[i]] ? 1 : 0;
    } else {
      out[i * k + map.cells[i]] = 1;
    }
  }
  return out;
}

export function extractCrop(
  map: SemanticMap,
  occ: OccupancyGrid,
  mode: Mode,
  cropSize: number,
  x0: number,
  y0: number
): CropPair {
  if (x0 < 0 || y0 < 0 || x0 + cropSize > map.width || y0 + cropSize > map.height) {
    throw new Error(`crop at (${x0}, ${y0}) leaves the map`);
  }
  const k = inputChannels(map, mode);
  const stack = mapToTensorData(map, mode);
  const input = new Float32Array(cropSize * cropSize * k);
  const target = new Float32Array(cropSize * cropSize);
  let maxV = 0;
  for (let y = 0; y < cropSize; y++) {
    for (let x = 0; x < cropSize; x++) {
      const src = (y0 + y) * map.width + (x0 + x);
      const dst = y * cropSize + x;
      for (let c = 0; c < k; c++) {
        input[dst * k + c] = stack[src * k + c];
      }
      const v = occ.values[src];
      target[dst] = v;
      if (v > maxV) maxV = v;
    }
  }
  if (maxV > 0) {
    for (let i = 0; i < target.length; i++) target[i] /= maxV;
  }
  return { input, target };
}

function transformIndex(
  x: number, y: number, n: number, rot: number, mirror: boolean
): [number, number] {
  let [sx, sy] = [x, y];
  if (mirror) sx = n - 1 - sx;
  for (let r = 0; r < rot; r++) {
    const [tx, ty] = [sx, sy];
    sx = n - 1 - ty;
    sy = tx;
  }
  return [sx, sy];
}

function transformCrop(pair: CropPair, n: number, k: number, rot: number,
                       mirror: boolean): CropPair {
  const input = new Float32Array(pair.input.length);
  const target = new Float32Array(pair.target.length);
  for (let y = 0; y < n; y++) {
    for (let x = 0; x < n; x++) {
      const [sx, sy] = transformIndex(x, y, n, rot, mirror);
      const src = sy * n + sx;
      const dst = y * n + x;
      target[dst] = pair.target[src];
      for (let c = 0; c < k; c++) {
        input[dst * k + c] = pair.input[src * k + c];
      }
    }
  }
  return { input, target };
}

/** The 8 dihedral variants of a square crop (4 rotations x 2 mirrorings). */
export function augmentCrop(pair: CropPair, cropSize: number, channels: number): CropPair[] {
  const out: CropPair[] = [];
  for (const mirror of [false, true]) {
    for (let rot = 0; rot < 4; rot++) {
      out.push(transformCrop(pair, cropSize, channels, rot, mirror));
    }
  }
  return out;
}

export interface TrainingSetConfig {
  cropSize: number;
  cropsPerMap: number;
  mode: Mode;
}

/** Random crops over every map, each augmented to its 8 dihedral variants. */
export function makeTrainingSet(
  maps: { map: SemanticMap; occ: OccupancyGrid; name: string }[],
  cfg: TrainingSetConfig,
  seed: number
): CropPair[] {
  const rand = mulberry32(seed);
  const pairs: CropPair[] = [];
  for (const { map, occ, name } of maps) {
    if (map.width < cfg.cropSize || map.height < cfg.cropSize) {
      throw new Error(`map ${name} is smaller than the ${cfg.cropSize}-cell crop`);
    }
    const k = inputChannels(map, cfg.mode);
    for (let c = 0; c < cfg.cropsPerMap; c++) {
      const x0 = Math.floor(rand() * (map.width - cfg.cropSize + 1));
      const y0 = Math.floor(rand() * (map.height - cfg.cropSize + 1));
      const base = extractCrop(map, occ, cfg.mode, cfg.cropSize, x0, y0);
      pairs.push(...augmentCrop(base, cfg.cropSize, k));
    }
  }
  return pairs;
}
