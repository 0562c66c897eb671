/**
 * Parsers and writers for the shared plain-text grid formats
 * (.smap / .occ / manifest). Grids are row-major with row 0 at the top.
 */

import * as fs from "node:fs";
import * as path from "node:path";

export interface ClassTable {
  names: string[];
  walkable: boolean[];
}

export interface SemanticMap {
  width: number;
  height: number;
  classes: ClassTable;
  cells: Int32Array; // row-major class ids
}

export interface OccupancyGrid {
  width: number;
  height: number;
  values: Float64Array; // row-major, sums to 1
}

export class FormatError extends Error {}

function splitLines(text: string): string[] {
  return text.split(/\r?\n/);
}

export function parseMap(text: string): SemanticMap {
  const lines = splitLines(text);
  if (lines[0]?.trim() !== "SMAP 1") {
    throw new FormatError("line 1: expected 'SMAP 1' header");
  }
  const dims = (lines[1] ?? "").trim().split(/\s+/).map(Number);
  if (dims.length !== 3 || dims.some((d) => !Number.isInteger(d) || d < 1)) {
    throw new FormatError("line 2: expected '<width> <height> <K>'");
  }
  const [width, height, k] = dims;
  const names = (lines[2] ?? "").trim().split(/\s+/);
  if (names.length !== k) {
    throw new FormatError(`line 3: expected ${k} class names`);
  }
  const flags = (lines[3] ?? "").trim().split(/\s+/);
  if (flags.length !== k || flags.some((f) => f !== "0" && f !== "1")) {
    throw new FormatError(`line 4: expected ${k} walkability flags`);
  }
  const cells = new Int32Array(width * height);
  for (let y = 0; y < height; y++) {
    const row = (lines[4 + y] ?? "").trim().split(/\s+/).map(Number);
    if (row.length !== width) {
      throw new FormatError(`line ${5 + y}: expected ${width} values`);
    }
    for (let x = 0; x < width; x++) {
      const v = row[x];
      if (!Number.isInteger(v) || v < 0 || v >= k) {
        throw new FormatError(`line ${5 + y}: class id ${v} out of range [0, ${k - 1}]`);
      }
      cells[y * width + x] = v;
    }
  }
  return {
    width,
    height,
    classes: { names, walkable: flags.map((f) => f === "1") },
    cells,
  };
}

export function parseOccupancy(text: string): OccupancyGrid {
  const lines = splitLines(text);
  if (lines[0]?.trim() !== "OCC 1") {
    throw new FormatError("line 1: expected 'OCC 1' header");
  }
  const dims = (lines[1] ?? "").trim().split(/\s+/).map(Number);
  if (dims.length !== 2 || dims.some((d) => !Number.isInteger(d) || d < 1)) {
    throw new FormatError("line 2: expected '<width> <height>'");
  }
  const [width, height] = dims;
  const values = new Float64Array(width * height);
  let total = 0;
  for (let y = 0; y < height; y++) {
    const row = (lines[2 + y] ?? "").trim().split(/\s+/).map(Number);
    if (row.length !== width || row.some((v) => Number.isNaN(v))) {
      throw new FormatError(`line ${3 + y}: expected ${width} floats`);
    }
    for (let x = 0; x < width; x++) {
      if (row[x] < 0) throw new FormatError(`line ${3 + y}: negative value`);
      values[y * width + x] = row[x];
      total += row[x];
    }
  }
  if (Math.abs(total - 1) > 1e-4) {
    throw new FormatError(`occupancy mass ${total} ≠ 1`);
  }
  return { width, height, values };
}

export function formatOccupancy(occ: OccupancyGrid): string {
  const lines = ["OCC 1", `${occ.width} ${occ.height}`];
  for (let y = 0; y < occ.height; y++) {
    const row: string[] = [];
    for (let x = 0; x < occ.width; x++) {
      row.push(Number(occ.values[y * occ.width + x].toPrecision(9)).toString());
    }
    lines.push(row.join(" "));
  }
  return lines.join("\n") + "\n";
}

export interface DatasetEntry {
  mapPath: string;
  trajPath: string;
  occPath: string;
}

export function loadManifest(manifestPath: string): DatasetEntry[] {
  const base = path.dirname(manifestPath);
  const entries: DatasetEntry[] = [];
  const lines = splitLines(fs.readFileSync(manifestPath, "utf8"));
  lines.forEach((line, i) => {
    if (!line.trim()) return;
    const parts = line.trim().split(/\s+/);
    if (parts.length !== 3) {
      throw new FormatError(`manifest line ${i + 1}: expected 3 paths`);
    }
    entries.push({
      mapPath: path.join(base, parts[0]),
      trajPath: path.join(base, parts[1]),
      occPath: path.join(base, parts[2]),
    });
  });
  if (entries.length === 0) throw new FormatError("manifest lists no maps");
  return entries;
}

export function loadMap(p: string): SemanticMap {
  return parseMap(fs.readFileSync(p, "utf8"));
}

export function loadOccupancy(p: string): OccupancyGrid {
  return parseOccupancy(fs.readFileSync(p, "utf8"));
}

export function saveOccupancy(occ: OccupancyGrid, p: string): void {
  fs.writeFileSync(p, formatOccupancy(occ));
}
