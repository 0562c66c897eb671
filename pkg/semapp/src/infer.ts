/**
 * Full-map prediction by averaging network outputs over random crops:
 * every state's value is the mean prediction across all crops covering it,
 * states no crop touches receive the smallest covered value, and the result
 * is normalized into a distribution.
 */

import * as tf from "@tensorflow/tfjs";
import type { OccupancyGrid, SemanticMap } from "./formats.js";
import { Mode, extractCrop, mulberry32 } from "./crops.js";

export interface InferConfig {
  mode: Mode;
  cropSize: number;
  nCrops: number;
  seed: number;
}

export function samplePositions(
  map: SemanticMap, cropSize: number, nCrops: number, seed: number
): [number, number][] {
  const rand = mulberry32(seed);
  const maxX = map.width - cropSize;
  const maxY = map.height - cropSize;
  const positions: [number, number][] = [];
  for (let i = 0; i < nCrops; i++) {
    positions.push([
      Math.floor(rand() * (maxX + 1)),
      Math.floor(rand() * (maxY + 1)),
    ]);
  }
  return positions;
}

/** Mean network output per state over the given crops; uncovered states get
 * the smallest covered value. Not yet normalized. */
export async function averagePredictions(
  model: tf.LayersModel, map: SemanticMap, mode: Mode, cropSize: number,
  positions: [number, number][]
): Promise<Float64Array> {
  const zeroOcc: OccupancyGrid = {
    width: map.width, height: map.height,
    values: new Float64Array(map.width * map.height),
  };
  const k = model.inputs[0].shape[3] as number;
  const batch = new Float32Array(positions.length * cropSize * cropSize * k);
  positions.forEach(([x0, y0], i) => {
    const pair = extractCrop(map, zeroOcc, mode, cropSize, x0, y0);
    batch.set(pair.input, i * cropSize * cropSize * k);
  });

  const input = tf.tensor4d(batch, [positions.length, cropSize, cropSize, k]);
  const output = model.predict(input) as tf.Tensor4D;
  const predictions = (await output.data()) as Float32Array;
  input.dispose();
  output.dispose();

  const sums = new Float64Array(map.width * map.height);
  const counts = new Float64Array(map.width * map.height);
  positions.forEach(([x0, y0], i) => {
    const base = i * cropSize * cropSize;
    for (let y = 0; y < cropSize; y++) {
      for (let x = 0; x < cropSize; x++) {
        const cell = (y0 + y) * map.width + (x0 + x);
        sums[cell] += predictions[base + y * cropSize + x];
        counts[cell] += 1;
      }
    }
  });

  const values = new Float64Array(map.width * map.height);
  let minCovered = Infinity;
  for (let i = 0; i < values.length; i++) {
    if (counts[i] > 0) {
      values[i] = sums[i] / counts[i];
      if (values[i] < minCovered) minCovered = values[i];
    }
  }
  if (!Number.isFinite(minCovered)) minCovered = 0;
  for (let i = 0; i < values.length; i++) {
    if (counts[i] === 0) values[i] = minCovered;
  }
  return values;
}

export async function inferFullMap(
  model: tf.LayersModel, map: SemanticMap, cfg: InferConfig
): Promise<OccupancyGrid> {
  if (map.width < cfg.cropSize || map.height < cfg.cropSize) {
    throw new Error(`map smaller than the ${cfg.cropSize}-cell crop`);
  }
  if (cfg.nCrops < 1) throw new Error("need at least one crop");
  const positions = samplePositions(map, cfg.cropSize, cfg.nCrops, cfg.seed);
  const values = await averagePredictions(model, map, cfg.mode, cfg.cropSize, positions);
  let total = 0;
  for (const v of values) total += v;
  if (total <= 0) throw new Error("network produced an all-zero map");
  for (let i = 0; i < values.length; i++) values[i] /= total;
  return { width: map.width, height: map.height, values };
}
