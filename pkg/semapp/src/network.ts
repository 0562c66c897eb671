/**
 * Compact image-to-image network: dense blocks with small growth around one
 * downsampling stage, a skip connection across the bottleneck, and a sigmoid
 * head. 19 convolution layers, one pooling layer, ~6.5k parameters at four
 * input channels.
 */

import * as tf from "@tensorflow/tfjs";

export interface NetworkConfig {
  cropSize: number;
  channels: number; // semantic classes, or 1 in binary mode
  growthRate: number;
  layersPerBlock: number;
  dropout: number;
  weightDecay: number;
}

export const DEFAULT_NETWORK: Omit<NetworkConfig, "channels"> = {
  cropSize: 32,
  growthRate: 2,
  layersPerBlock: 5,
  dropout: 0.35,
  weightDecay: 4.5e-5,
};

function denseBlock(
  x: tf.SymbolicTensor,
  cfg: NetworkConfig,
  name: string
): tf.SymbolicTensor {
  let stack = x;
  for (let i = 0; i < cfg.layersPerBlock; i++) {
    const conv = tf.layers
      .conv2d({
        filters: cfg.growthRate,
        kernelSize: 3,
        padding: "same",
        activation: "relu",
        kernelRegularizer: tf.regularizers.l2({ l2: cfg.weightDecay }),
        name: `${name}_conv${i}`,
      })
      .apply(stack) as tf.SymbolicTensor;
    const dropped = cfg.dropout
      ? (tf.layers
          .dropout({ rate: cfg.dropout, name: `${name}_drop${i}` })
          .apply(conv) as tf.SymbolicTensor)
      : conv;
    stack = tf.layers
      .concatenate({ name: `${name}_cat${i}` })
      .apply([stack, dropped]) as tf.SymbolicTensor;
  }
  return stack;
}

export function buildNetwork(cfg: NetworkConfig): tf.LayersModel {
  if (cfg.channels < 1) throw new Error("need at least one input channel");
  const reg = () => tf.regularizers.l2({ l2: cfg.weightDecay });
  const input = tf.input({
    shape: [cfg.cropSize, cfg.cropSize, cfg.channels],
    name: "semantic_stack",
  });
  const stem = tf.layers
    .conv2d({
      filters: 8, kernelSize: 3, padding: "same", activation: "relu",
      kernelRegularizer: reg(), name: "stem",
    })
    .apply(input) as tf.SymbolicTensor;

  const enc = denseBlock(stem, cfg, "enc");
  const squeezed = tf.layers
    .conv2d({
      filters: 12, kernelSize: 1, activation: "relu",
      kernelRegularizer: reg(), name: "down_conv",
    })
    .apply(enc) as tf.SymbolicTensor;
  const pooled = tf.layers
    .maxPooling2d({ poolSize: 2, strides: 2, name: "down_pool" })
    .apply(squeezed) as tf.SymbolicTensor;

  const bottleneck = denseBlock(pooled, cfg, "mid");

  const up = tf.layers
    .upSampling2d({ size: [2, 2], name: "up" })
    .apply(bottleneck) as tf.SymbolicTensor;
  const upConv = tf.layers
    .conv2d({
      filters: 12, kernelSize: 1, activation: "relu",
      kernelRegularizer: reg(), name: "up_conv",
    })
    .apply(up) as tf.SymbolicTensor;
  const joined = tf.layers
    .concatenate({ name: "skip" })
    .apply([upConv, enc]) as tf.SymbolicTensor;

  const dec = denseBlock(joined, cfg, "dec");
  const out = tf.layers
    .conv2d({
      filters: 1, kernelSize: 1, activation: "sigmoid",
      kernelRegularizer: reg(), name: "head",
    })
    .apply(dec) as tf.SymbolicTensor;
  return tf.model({ inputs: input, outputs: out });
}

export function countParameters(model: tf.LayersModel): number {
  return model.countParams();
}

export function countConvLayers(model: tf.LayersModel): number {
  return model.layers.filter((l) => l.getClassName() === "Conv2D").length;
}

export function countPoolingLayers(model: tf.LayersModel): number {
  return model.layers.filter((l) => l.getClassName().includes("Pooling")).length;
}
