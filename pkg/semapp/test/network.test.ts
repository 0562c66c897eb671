import { describe, expect, it } from "vitest";
import * as tf from "@tensorflow/tfjs";

import {
  DEFAULT_NETWORK,
  buildNetwork,
  countConvLayers,
  countParameters,
  countPoolingLayers,
} from "../src/network.js";

tf.setBackend("cpu");

function build(channels: number) {
  return buildNetwork({ ...DEFAULT_NETWORK, channels });
}

describe("network architecture", () => {
  it("maps a crop to a same-sized single-channel output", () => {
    const model = build(4);
    expect(model.outputs[0].shape).toEqual([null, 32, 32, 1]);
  });

  it("has a parameter count within 20% of 6.5k", () => {
    expect(countParameters(build(4))).toBeGreaterThanOrEqual(5200);
    expect(countParameters(build(4))).toBeLessThanOrEqual(7800);
    // Binary mode stays in range too.
    expect(countParameters(build(1))).toBeGreaterThanOrEqual(5200);
    expect(countParameters(build(1))).toBeLessThanOrEqual(7800);
  });

  it("uses 19 convolution layers and one pooling stage", () => {
    const model = build(4);
    expect(countConvLayers(model)).toBe(19);
    expect(countPoolingLayers(model)).toBe(1);
  });

  it("produces finite sigmoid outputs on zero input", async () => {
    const model = build(4);
    const out = model.predict(tf.zeros([1, 32, 32, 4])) as tf.Tensor;
    const data = await out.data();
    for (const v of data) {
      expect(Number.isFinite(v)).toBe(true);
      expect(v).toBeGreaterThanOrEqual(0);
      expect(v).toBeLessThanOrEqual(1);
    }
  });
});
