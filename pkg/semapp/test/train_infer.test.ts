import { describe, expect, it } from "vitest";
import * as tf from "@tensorflow/tfjs";
import * as fs from "node:fs";
import * as os from "node:os";
import * as path from "node:path";

import { DEFAULT_NETWORK, buildNetwork } from "../src/network.js";
import { EarlyStopper, DEFAULT_TRAIN, trainNetwork } from "../src/train.js";
import { averagePredictions, inferFullMap, samplePositions } from "../src/infer.js";
import { loadModel, saveModel } from "../src/weights.js";
import { checkerMap, stripeOccupancy } from "./fixtures.js";

tf.setBackend("cpu");

describe("early stopping rule", () => {
  it("triggers after exactly 15 stagnant epochs on a frozen validation", () => {
    const stopper = new EarlyStopper(15);
    expect(stopper.update(0, 0.5)).toBe(false); // first epoch improves
    let stoppedAt = -1;
    for (let epoch = 1; epoch < 100; epoch++) {
      if (stopper.update(epoch, 0.5)) {
        stoppedAt = epoch;
        break;
      }
    }
    expect(stoppedAt).toBe(15);
  });

  it("resets the counter on improvement", () => {
    const stopper = new EarlyStopper(3);
    expect(stopper.update(0, 1.0)).toBe(false);
    expect(stopper.update(1, 0.9)).toBe(false);
    expect(stopper.update(2, 0.95)).toBe(false);
    expect(stopper.update(3, 0.95)).toBe(false);
    expect(stopper.update(4, 0.95)).toBe(true); // 3 epochs past the best
  });
});

function tinyEntries(n: number) {
  return Array.from({ length: n }, (_, i) => ({
    name: `m${i}`,
    map: checkerMap(8),
    occ: stripeOccupancy(8),
  }));
}

describe("training", () => {
  it("reduces the loss on a small synthetic set", async () => {
    const result = await trainNetwork(tinyEntries(4), {
      ...DEFAULT_TRAIN,
      cropSize: 8,
      cropsPerMap: 2,
      epochs: 8,
      batchSize: 16,
      dropout: 0.0,
      seed: 3,
    }, true);
    const losses = result.history.map((h) => h.loss);
    expect(losses.at(-1)!).toBeLessThan(losses[0]);
    expect(result.channels).toBe(4);
  }, 120_000);

  it("needs at least two maps", async () => {
    await expect(trainNetwork(tinyEntries(1), DEFAULT_TRAIN, true)).rejects.toThrow(
      /at least 2 maps/
    );
  });
});

describe("crop-averaged inference", () => {
  const cfg = { ...DEFAULT_NETWORK, channels: 4, cropSize: 8, dropout: 0 };

  it("equals the direct network output in the single-crop identity case", async () => {
    const model = buildNetwork(cfg);
    const map = checkerMap(8);
    const occ = await inferFullMap(model, map, {
      mode: "semantic", cropSize: 8, nCrops: 1, seed: 0,
    });
    const direct = await averagePredictions(model, map, "semantic", 8, [[0, 0]]);
    let total = 0;
    for (const v of direct) total += v;
    for (let i = 0; i < direct.length; i++) {
      expect(occ.values[i]).toBeCloseTo(direct[i] / total, 12);
    }
    expect(occ.values.reduce((a, b) => a + b, 0)).toBeCloseTo(1.0, 9);
  });

  it("averages overlapping crops per state", async () => {
    const model = buildNetwork(cfg);
    const map = checkerMap(12);
    const positions: [number, number][] = [[0, 0], [4, 0]];
    const combined = await averagePredictions(model, map, "semantic", 8, positions);
    const a = await averagePredictions(model, map, "semantic", 8, [[0, 0]]);
    const b = await averagePredictions(model, map, "semantic", 8, [[4, 0]]);
    // Overlap columns 4..7 of rows 0..7: mean of the two single predictions.
    for (let y = 0; y < 8; y++) {
      for (let x = 4; x < 8; x++) {
        const i = y * 12 + x;
        expect(combined[i]).toBeCloseTo((a[i] + b[i]) / 2, 10);
      }
    }
  });

  it("is invariant to crop ordering", async () => {
    const model = buildNetwork(cfg);
    const map = checkerMap(12);
    const positions = samplePositions(map, 8, 6, 123);
    const reversed = [...positions].reverse();
    const fwd = await averagePredictions(model, map, "semantic", 8, positions);
    const rev = await averagePredictions(model, map, "semantic", 8, reversed);
    for (let i = 0; i < fwd.length; i++) {
      expect(rev[i]).toBeCloseTo(fwd[i], 10);
    }
  });

  it("sampled positions are deterministic in the seed", () => {
    const map = checkerMap(12);
    expect(samplePositions(map, 8, 9, 77)).toEqual(samplePositions(map, 8, 9, 77));
  });
});

describe("weights file", () => {
  it("round-trips the model and metadata", async () => {
    const model = buildNetwork({ ...DEFAULT_NETWORK, channels: 4, dropout: 0 });
    const dir = fs.mkdtempSync(path.join(os.tmpdir(), "semapp-"));
    const file = path.join(dir, "weights.json");
    await saveModel(model, {
      mode: "semantic", cropSize: 32, channels: 4,
      classNames: ["sidewalk", "grass", "road", "obstacle"],
    }, file);
    const { model: loaded, metadata } = await loadModel(file);
    expect(metadata.mode).toBe("semantic");
    expect(metadata.classNames).toHaveLength(4);
    const x = tf.randomUniform([1, 32, 32, 4], 0, 1, "float32", 5);
    const a = await (model.predict(x) as tf.Tensor).data();
    const b = await (loaded.predict(x) as tf.Tensor).data();
    for (let i = 0; i < a.length; i++) {
      expect(b[i]).toBeCloseTo(a[i], 6);
    }
  });
});
