import { describe, expect, it } from "vitest";
import * as fs from "node:fs";
import * as os from "node:os";
import * as path from "node:path";

import {
  formatOccupancy,
  loadManifest,
  parseMap,
  parseOccupancy,
} from "../src/formats.js";

const MAP_TEXT =
  "SMAP 1\n3 2 4\nsidewalk grass road obstacle\n1 1 0 0\n0 1 2\n3 0 1\n";

describe("map parsing", () => {
  it("reads dimensions, classes and cells", () => {
    const m = parseMap(MAP_TEXT);
    expect(m.width).toBe(3);
    expect(m.height).toBe(2);
    expect(m.classes.names).toEqual(["sidewalk", "grass", "road", "obstacle"]);
    expect(m.classes.walkable).toEqual([true, true, false, false]);
    expect(Array.from(m.cells)).toEqual([0, 1, 2, 3, 0, 1]);
  });

  it("rejects bad headers and out-of-range ids", () => {
    expect(() => parseMap("SMAPX\n")).toThrow(/line 1/);
    expect(() => parseMap(MAP_TEXT.replace("3 0 1", "3 0 9"))).toThrow(/out of range/);
  });
});

describe("occupancy parsing and writing", () => {
  it("round-trips through the text format", () => {
    const occ = parseOccupancy("OCC 1\n2 2\n0.25 0.25\n0.125 0.375\n");
    const again = parseOccupancy(formatOccupancy(occ));
    for (let i = 0; i < 4; i++) {
      expect(again.values[i]).toBeCloseTo(occ.values[i], 9);
    }
  });

  it("rejects occupancy not summing to 1", () => {
    expect(() => parseOccupancy("OCC 1\n2 1\n0.4 0.4\n")).toThrow(/≠ 1/);
  });
});

describe("manifest", () => {
  it("resolves entries relative to the manifest", () => {
    const dir = fs.mkdtempSync(path.join(os.tmpdir(), "semapp-mani-"));
    const manifest = path.join(dir, "manifest.txt");
    fs.writeFileSync(manifest, "a.smap a.traj a.occ\nb.smap b.traj b.occ\n");
    const entries = loadManifest(manifest);
    expect(entries).toHaveLength(2);
    expect(entries[0].mapPath).toBe(path.join(dir, "a.smap"));
    expect(entries[1].occPath).toBe(path.join(dir, "b.occ"));
  });
});
