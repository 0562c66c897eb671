/**
 * Command line: `semapp train --data MANIFEST --out WEIGHTS [--mode binary]`
 * and `semapp infer --map M.smap --weights W --out P.occ --crops N`.
 */

import * as tf from "@tensorflow/tfjs";
import { loadManifest, loadMap, loadOccupancy, saveOccupancy } from "./formats.js";
import { inferFullMap } from "./infer.js";
import { DEFAULT_TRAIN, MapEntry, trainNetwork } from "./train.js";
import { loadModel, saveModel } from "./weights.js";
import type { Mode } from "./crops.js";

function parseFlags(argv: string[]): Map<string, string> {
  const flags = new Map<string, string>();
  for (let i = 0; i < argv.length; i += 2) {
    const key = argv[i];
    if (!key.startsWith("--") || i + 1 >= argv.length) {
      throw new Error(`malformed flag near ${key}`);
    }
    flags.set(key.slice(2), argv[i + 1]);
  }
  return flags;
}

function need(flags: Map<string, string>, key: string): string {
  const v = flags.get(key);
  if (v === undefined) throw new Error(`missing --${key}`);
  return v;
}

async function cmdTrain(argv: string[]): Promise<number> {
  const flags = parseFlags(argv);
  const manifest = need(flags, "data");
  const out = need(flags, "out");
  const mode = (flags.get("mode") ?? "semantic") as Mode;
  if (mode !== "semantic" && mode !== "binary") {
    throw new Error(`unknown mode ${mode}`);
  }
  const cfg = {
    ...DEFAULT_TRAIN,
    mode,
    cropSize: Number(flags.get("crop") ?? DEFAULT_TRAIN.cropSize),
    cropsPerMap: Number(flags.get("crops-per-map") ?? DEFAULT_TRAIN.cropsPerMap),
    epochs: Number(flags.get("epochs") ?? DEFAULT_TRAIN.epochs),
    seed: Number(flags.get("seed") ?? DEFAULT_TRAIN.seed),
  };
  const entries: MapEntry[] = loadManifest(manifest).map((e) => ({
    name: e.mapPath,
    map: loadMap(e.mapPath),
    occ: loadOccupancy(e.occPath),
  }));
  const { model, history, channels } = await trainNetwork(entries, cfg);
  await saveModel(model, {
    mode,
    cropSize: cfg.cropSize,
    channels,
    classNames: entries[0].map.classes.names,
  }, out);
  const last = history[history.length - 1];
  console.log(`trained ${history.length} epochs, final val loss ${last.valLoss.toFixed(5)}`);
  console.log(out);
  return 0;
}

async function cmdInfer(argv: string[]): Promise<number> {
  const flags = parseFlags(argv);
  const mapPath = need(flags, "map");
  const weights = need(flags, "weights");
  const out = need(flags, "out");
  const nCrops = Number(flags.get("crops") ?? 1);
  const seed = Number(flags.get("seed") ?? 0);
  const { model, metadata } = await loadModel(weights);
  const map = loadMap(mapPath);
  if (metadata.mode === "semantic" &&
      metadata.classNames.join(" ") !== map.classes.names.join(" ")) {
    throw new Error(
      `weights were trained for classes [${metadata.classNames}], map has [${map.classes.names}]`
    );
  }
  const occ = await inferFullMap(model, map, {
    mode: metadata.mode, cropSize: metadata.cropSize, nCrops, seed,
  });
  saveOccupancy(occ, out);
  console.log(out);
  return 0;
}

export async function main(argv: string[]): Promise<number> {
  tf.setBackend("cpu");
  const [command, ...rest] = argv;
  try {
    if (command === "train") return await cmdTrain(rest);
    if (command === "infer") return await cmdInfer(rest);
    console.error("usage: semapp <train|infer> [flags]");
    return 1;
  } catch (err) {
    console.error(`error: ${err instanceof Error ? err.message : err}`);
    return 1;
  }
}

const isMain = process.argv[1]?.endsWith("cli.js");
if (isMain) {
  main(process.argv.slice(2)).then((code) => process.exit(code));
}
