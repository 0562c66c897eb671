import { parseMap, parseOccupancy, SemanticMap, OccupancyGrid } from "../src/formats.js";

export function checkerMap(size: number): SemanticMap {
  const rows: string[] = [];
  for (let y = 0; y < size; y++) {
    let row = "";
    for (let x = 0; x < size; x++) {
      row += `${(x + y) % 4} `;
    }
    rows.push(row.trim());
  }
  return parseMap(
    ["SMAP 1", `${size} ${size} 4`, "sidewalk grass road obstacle", "1 1 0 0",
     ...rows].join("\n")
  );
}

export function stripeOccupancy(size: number): OccupancyGrid {
  // Mass concentrated on one horizontal stripe.
  const values: number[][] = [];
  const stripe = Math.floor(size / 2);
  const perCell = 1 / size;
  for (let y = 0; y < size; y++) {
    values.push(new Array(size).fill(0).map((_, x) => (y === stripe ? perCell : 0)));
  }
  const lines = ["OCC 1", `${size} ${size}`];
  for (const row of values) lines.push(row.map((v) => v.toPrecision(9)).join(" "));
  return parseOccupancy(lines.join("\n"));
}
