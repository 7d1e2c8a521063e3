/**
 * Minimal CSV reader for the harness outputs. The writer never quotes or
 * embeds commas, so a plain split is exact.
 */

import { readFileSync } from "node:fs";

export interface CsvTable {
  path: string;
  columns: string[];
  rows: Record<string, string>[];
}

export class PlotError extends Error {}

export function readCsv(path: string): CsvTable {
  let text: string;
  try {
    text = readFileSync(path, "utf8");
  } catch {
    throw new PlotError(`cannot read file '${path}'`);
  }
  const lines = text.split("\n").filter((ln) => ln.length > 0);
  if (lines.length === 0) {
    throw new PlotError(`file '${path}' is empty`);
  }
  const columns = lines[0].split(",");
  const rows = lines.slice(1).map((ln) => {
    const cells = ln.split(",");
    const row: Record<string, string> = {};
    columns.forEach((c, i) => (row[c] = cells[i] ?? ""));
    return row;
  });
  return { path, columns, rows };
}

/** Assert the named columns exist; the error names the first missing one. */
export function requireColumns(table: CsvTable, needed: string[]): void {
  for (const col of needed) {
    if (!table.columns.includes(col)) {
      throw new PlotError(`missing column '${col}' in ${table.path}`);
    }
  }
}

export function num(row: Record<string, string>, col: string): number {
  const v = Number(row[col]);
  if (Number.isNaN(v) && row[col] !== "nan") {
    throw new PlotError(`cell '${row[col]}' in column '${col}' is not numeric`);
  }
  return v;
}
