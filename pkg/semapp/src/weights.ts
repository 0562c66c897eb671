/**
 * Self-contained model serialization: topology, weights (base64) and
 * run metadata in one JSON file, so no filesystem IO handlers are needed.
 */

import * as fs from "node:fs";
import * as tf from "@tensorflow/tfjs";
import type { Mode } from "./crops.js";

export interface ModelMetadata {
  mode: Mode;
  cropSize: number;
  channels: number;
  classNames: string[];
}

interface SavedFile {
  metadata: ModelMetadata;
  modelTopology: unknown;
  weightSpecs: tf.io.WeightsManifestEntry[];
  weightDataBase64: string;
}

export async function saveModel(
  model: tf.LayersModel, metadata: ModelMetadata, path: string
): Promise<void> {
  const artifacts = await new Promise<tf.io.ModelArtifacts>((resolve, reject) => {
    model
      .save(tf.io.withSaveHandler(async (a) => {
        resolve(a);
        return { modelArtifactsInfo: { dateSaved: new Date(), modelTopologyType: "JSON" } };
      }))
      .catch(reject);
  });
  const data = artifacts.weightData as ArrayBuffer;
  const file: SavedFile = {
    metadata,
    modelTopology: artifacts.modelTopology,
    weightSpecs: artifacts.weightSpecs ?? [],
    weightDataBase64: Buffer.from(data).toString("base64"),
  };
  fs.writeFileSync(path, JSON.stringify(file));
}

export async function loadModel(
  path: string
): Promise<{ model: tf.LayersModel; metadata: ModelMetadata }> {
  const file = JSON.parse(fs.readFileSync(path, "utf8")) as SavedFile;
  const weightData = new Uint8Array(Buffer.from(file.weightDataBase64, "base64")).buffer;
  const model = await tf.loadLayersModel(
    tf.io.fromMemory({
      modelTopology: file.modelTopology as object,
      weightSpecs: file.weightSpecs,
      weightData,
    })
  );
  return { model, metadata: file.metadata };
}
