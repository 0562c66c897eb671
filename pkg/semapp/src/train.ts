/**
 * Training loop: pixel-wise binary cross-entropy with Adam, per-epoch
 * learning-rate decay, L2 weight penalty and early stopping on a
 * validation plateau with best-weights restore.
 */

import * as tf from "@tensorflow/tfjs";
import type { OccupancyGrid, SemanticMap } from "./formats.js";
import { CropPair, Mode, inputChannels, makeTrainingSet, mulberry32 } from "./crops.js";
import { DEFAULT_NETWORK, buildNetwork } from "./network.js";

export interface TrainConfig {
  mode: Mode;
  cropSize: number;
  cropsPerMap: number;
  epochs: number;
  batchSize: number;
  learningRate: number;
  lrDecay: number;
  patience: number;
  dropout: number;
  weightDecay: number;
  seed: number;
}

export const DEFAULT_TRAIN: TrainConfig = {
  mode: "semantic",
  cropSize: 32,
  cropsPerMap: 1,
  epochs: 100,
  batchSize: 32,
  learningRate: 0.01,
  lrDecay: 0.9985,
  patience: 15,
  dropout: DEFAULT_NETWORK.dropout,
  weightDecay: DEFAULT_NETWORK.weightDecay,
  seed: 0,
};

/** Stop once the validation loss has not improved for `patience` epochs. */
export class EarlyStopper {
  best = Infinity;
  bestEpoch = -1;

  constructor(readonly patience: number) {}

  /** Feed one epoch's validation loss; true means stop after this epoch. */
  update(epoch: number, valLoss: number): boolean {
    if (valLoss < this.best) {
      this.best = valLoss;
      this.bestEpoch = epoch;
      return false;
    }
    return epoch - this.bestEpoch >= this.patience;
  }
}

export interface MapEntry {
  name: string;
  map: SemanticMap;
  occ: OccupancyGrid;
}

function toTensors(pairs: CropPair[], cropSize: number, channels: number) {
  const n = pairs.length;
  const x = new Float32Array(n * cropSize * cropSize * channels);
  const y = new Float32Array(n * cropSize * cropSize);
  pairs.forEach((p, i) => {
    x.set(p.input, i * cropSize * cropSize * channels);
    y.set(p.target, i * cropSize * cropSize);
  });
  return {
    x: tf.tensor4d(x, [n, cropSize, cropSize, channels]),
    y: tf.tensor4d(y, [n, cropSize, cropSize, 1]),
  };
}

export interface TrainResult {
  model: tf.LayersModel;
  history: { epoch: number; loss: number; valLoss: number }[];
  channels: number;
}

export async function trainNetwork(
  entries: MapEntry[], cfg: TrainConfig, quiet = false
): Promise<TrainResult> {
  if (entries.length < 2) {
    throw new Error("training needs at least 2 maps for a train/validation split");
  }
  const channels = inputChannels(entries[0].map, cfg.mode);
  // 50/50 split over maps, seeded.
  const rand = mulberry32(cfg.seed ^ 0x5eed);
  const order = entries
    .map((e, i) => ({ e, r: rand(), i }))
    .sort((a, b) => a.r - b.r || a.i - b.i)
    .map(({ e }) => e);
  const half = Math.max(1, Math.floor(order.length / 2));
  const trainMaps = order.slice(0, half);
  const valMaps = order.slice(half);

  const setCfg = { cropSize: cfg.cropSize, cropsPerMap: cfg.cropsPerMap, mode: cfg.mode };
  const trainPairs = makeTrainingSet(
    trainMaps.map((e) => ({ map: e.map, occ: e.occ, name: e.name })), setCfg, cfg.seed);
  const valPairs = makeTrainingSet(
    valMaps.map((e) => ({ map: e.map, occ: e.occ, name: e.name })), setCfg, cfg.seed + 1);

  const train = toTensors(trainPairs, cfg.cropSize, channels);
  const val = toTensors(valPairs, cfg.cropSize, channels);

  const model = buildNetwork({
    cropSize: cfg.cropSize,
    channels,
    growthRate: DEFAULT_NETWORK.growthRate,
    layersPerBlock: DEFAULT_NETWORK.layersPerBlock,
    dropout: cfg.dropout,
    weightDecay: cfg.weightDecay,
  });
  const optimizer = tf.train.adam(cfg.learningRate);
  model.compile({ optimizer, loss: "binaryCrossentropy" });

  const stopper = new EarlyStopper(cfg.patience);
  const history: TrainResult["history"] = [];
  let bestWeights = model.getWeights().map((w) => w.clone());
  try {
    for (let epoch = 0; epoch < cfg.epochs; epoch++) {
      (optimizer as unknown as { learningRate: number }).learningRate =
        cfg.learningRate * Math.pow(cfg.lrDecay, epoch);
      const fit = await model.fit(train.x, train.y, {
        epochs: 1,
        batchSize: cfg.batchSize,
        shuffle: true,
        verbose: 0,
        validationData: [val.x, val.y],
      });
      const loss = Number(fit.history["loss"][0]);
      const valLoss = Number(fit.history["val_loss"][0]);
      if (!Number.isFinite(loss) || !Number.isFinite(valLoss)) {
        throw new Error(`training diverged at epoch ${epoch} (loss ${loss})`);
      }
      history.push({ epoch, loss, valLoss });
      if (!quiet && epoch % 10 === 0) {
        console.error(`epoch ${epoch}: loss ${loss.toFixed(4)} val ${valLoss.toFixed(4)}`);
      }
      const improved = valLoss < stopper.best;
      const stop = stopper.update(epoch, valLoss);
      if (improved) {
        bestWeights.forEach((w) => w.dispose());
        bestWeights = model.getWeights().map((w) => w.clone());
      }
      if (stop) break;
    }
    model.setWeights(bestWeights);
  } finally {
    train.x.dispose(); train.y.dispose(); val.x.dispose(); val.y.dispose();
  }
  return { model, history, channels };
}
