/**
 * Figure requests: load the harness CSVs, apply filters, dispatch to a
 * chart builder, and write the PNG. Inputs are never modified, and the same
 * input bytes always render to the same output bytes.
 */

import { existsSync, readFileSync, writeFileSync } from "node:fs";
import { dirname, join } from "node:path";

import {
  armHistChart,
  blankRaster,
  coverageChart,
  ppChart,
  qqChart,
  widthChart,
} from "./charts.js";
import { CsvTable, PlotError, num, readCsv, requireColumns } from "./csv.js";
import { encodePng } from "./png.js";

export const FIGURE_KINDS = ["coverage", "width", "pp", "qq", "arm_hist"] as const;
export type FigureKind = (typeof FIGURE_KINDS)[number];

export interface PlotRequest {
  kind: FigureKind;
  /** trials.csv path; required for pp/qq/arm_hist, optional otherwise */
  trials?: string;
  /** summary.csv path; defaults to the file next to trials.csv */
  summary?: string;
  /** run.json path; defaults to the file next to trials.csv */
  run?: string;
  out: string;
  /** column=value filters, e.g. {method: "W_DECORR", side: "two"} */
  filters: Record<string, string>;
  arm: number;
  bins: number;
  /** overrides the truth value otherwise read from run.json */
  truth?: number;
}

interface RunInfo {
  targets: { label: string; truth: number }[];
}

function siblingOf(trialsPath: string | undefined, name: string): string | undefined {
  if (!trialsPath) return undefined;
  const candidate = join(dirname(trialsPath), name);
  return existsSync(candidate) ? candidate : undefined;
}

function loadRunInfo(req: PlotRequest): RunInfo | undefined {
  const path = req.run ?? siblingOf(req.trials, "run.json");
  if (!path) return undefined;
  let text: string;
  try {
    text = readFileSync(path, "utf8");
  } catch {
    throw new PlotError(`cannot read file '${path}'`);
  }
  const parsed = JSON.parse(text);
  return { targets: parsed.targets ?? [] };
}

function matchesFilters(row: Record<string, string>, filters: Record<string, string>): boolean {
  for (const [key, value] of Object.entries(filters)) {
    if (key in row && row[key] !== value) return false;
  }
  return true;
}

function summaryTable(req: PlotRequest): CsvTable {
  const path = req.summary ?? siblingOf(req.trials, "summary.csv");
  if (!path) {
    throw new PlotError("missing file: pass --summary (or --in with a sibling summary.csv)");
  }
  return readCsv(path);
}

function trialsTable(req: PlotRequest): CsvTable {
  if (!req.trials) throw new PlotError("missing file: this figure needs --in trials.csv");
  return readCsv(req.trials);
}

/**
 * Standardized errors per estimator, deduplicated to one estimate per
 * (trial, estimator) for the selected target.
 */
function standardizedErrors(req: PlotRequest, table: CsvTable): { name: string; errors: number[] }[] {
  requireColumns(table, ["trial", "estimator", "target_label", "estimate", "stderr"]);
  const info = loadRunInfo(req);
  const target =
    req.filters.target_label ??
    info?.targets[0]?.label ??
    table.rows[0]?.target_label;
  if (!target) throw new PlotError("cannot determine a target; pass --filter target_label=...");
  let truth = req.truth;
  if (truth === undefined) {
    const entry = info?.targets.find((t) => t.label === target);
    if (!entry) {
      throw new PlotError(
        `no truth for target '${target}': pass --truth or keep run.json next to trials.csv`,
      );
    }
    truth = entry.truth;
  }
  const seen = new Set<string>();
  const byEstimator = new Map<string, number[]>();
  for (const row of table.rows) {
    if (row.target_label !== target) continue;
    if (!matchesFilters(row, req.filters)) continue;
    const key = `${row.trial}|${row.estimator}`;
    if (seen.has(key)) continue;
    seen.add(key);
    const se = num(row, "stderr");
    if (se <= 0) continue;
    const z = (num(row, "estimate") - truth) / se;
    const bucket = byEstimator.get(row.estimator) ?? [];
    bucket.push(z);
    byEstimator.set(row.estimator, bucket);
  }
  return [...byEstimator.keys()].sort().map((name) => ({
    name,
    errors: byEstimator.get(name)!,
  }));
}

export function render(req: PlotRequest): string {
  const raster = blankRaster();
  if (req.kind === "coverage") {
    const table = summaryTable(req);
    requireColumns(table, ["method", "level", "side", "coverage"]);
    const side = req.filters.side ?? "one";
    const rows = table.rows.filter(
      (r) => r.side === side && matchesFilters(r, { ...req.filters, side }),
    );
    coverageChart(
      raster,
      rows.map((r) => ({
        method: r.method,
        level: num(r, "level"),
        coverage: num(r, "coverage"),
      })),
      side,
    );
  } else if (req.kind === "width") {
    const table = summaryTable(req);
    requireColumns(table, ["method", "level", "side", "mean_width", "sd_width"]);
    const side = req.filters.side ?? "two";
    const rows = table.rows.filter(
      (r) => r.side === side && matchesFilters(r, { ...req.filters, side }),
    );
    widthChart(
      raster,
      rows.map((r) => ({
        method: r.method,
        level: num(r, "level"),
        meanWidth: num(r, "mean_width"),
        sdWidth: num(r, "sd_width"),
      })),
    );
  } else if (req.kind === "pp" || req.kind === "qq") {
    const table = trialsTable(req);
    const series = standardizedErrors(req, table);
    (req.kind === "pp" ? ppChart : qqChart)(raster, series);
  } else {
    const table = trialsTable(req);
    requireColumns(table, ["trial", "arm_counts"]);
    const fractions: number[] = [];
    const seen = new Set<string>();
    for (const row of table.rows) {
      if (seen.has(row.trial)) continue;
      seen.add(row.trial);
      if (!row.arm_counts) {
        throw new PlotError(`trial ${row.trial} has no arm counts; not a bandit run`);
      }
      const counts = row.arm_counts.split("|").map(Number);
      if (req.arm < 0 || req.arm >= counts.length) {
        throw new PlotError(`arm ${req.arm} out of range; trace has ${counts.length} arms`);
      }
      const total = counts.reduce((s, c) => s + c, 0);
      fractions.push(counts[req.arm] / total);
    }
    armHistChart(raster, fractions, req.arm, req.bins);
  }
  writeFileSync(req.out, encodePng(raster));
  return req.out;
}
