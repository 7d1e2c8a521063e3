/**
 * Figure builders. Every chart draws into a fixed-size Raster through a
 * shared axes frame; colors are keyed by method/estimator name so the same
 * inputs always produce the same image.
 */

import { PlotError } from "./csv.js";
import { BLACK, Color, GRAY, LIGHT_GRAY, Raster, WHITE } from "./raster.js";
import { fmtTick, histogram, mean, normalCdf, normalQuantile, ticks } from "./stats.js";

export const WIDTH = 900;
export const HEIGHT = 600;

const MARGIN = { left: 78, right: 24, top: 42, bottom: 54 };

const SERIES_COLORS: Record<string, Color> = {
  OLS_GSN: [31, 119, 180],
  OLS_CONC: [44, 160, 44],
  W_DECORR: [214, 39, 40],
  OLS: [31, 119, 180],
};

const FALLBACK: Color[] = [
  [148, 103, 189],
  [255, 127, 14],
  [140, 86, 75],
  [23, 190, 207],
];

export function seriesColor(name: string, index: number): Color {
  return SERIES_COLORS[name] ?? FALLBACK[index % FALLBACK.length];
}

export interface Frame {
  raster: Raster;
  x0: number;
  y0: number;
  x1: number;
  y1: number;
  xmin: number;
  xmax: number;
  ymin: number;
  ymax: number;
  px(x: number): number;
  py(y: number): number;
}

export function makeFrame(
  raster: Raster,
  title: string,
  xlabel: string,
  ylabel: string,
  xmin: number,
  xmax: number,
  ymin: number,
  ymax: number,
): Frame {
  const x0 = MARGIN.left;
  const y0 = MARGIN.top;
  const x1 = raster.width - MARGIN.right;
  const y1 = raster.height - MARGIN.bottom;
  const frame: Frame = {
    raster, x0, y0, x1, y1, xmin, xmax, ymin, ymax,
    px: (x) => Math.round(x0 + ((x - xmin) / (xmax - xmin)) * (x1 - x0)),
    py: (y) => Math.round(y1 - ((y - ymin) / (ymax - ymin)) * (y1 - y0)),
  };
  raster.text(Math.round((raster.width - raster.textWidth(title, 2)) / 2), 12, title, BLACK, 2);
  for (const t of ticks(xmin, xmax)) {
    const px = frame.px(t);
    raster.line(px, y1 + 1, px, y1 + 5, BLACK);
    raster.line(px, y0, px, y1, LIGHT_GRAY, 2);
    const label = fmtTick(t);
    raster.text(px - Math.round(raster.textWidth(label) / 2), y1 + 9, label, BLACK);
  }
  for (const t of ticks(ymin, ymax)) {
    const py = frame.py(t);
    raster.line(x0 - 5, py, x0 - 1, py, BLACK);
    raster.line(x0, py, x1, py, LIGHT_GRAY, 2);
    const label = fmtTick(t);
    raster.text(x0 - 9 - raster.textWidth(label), py - 3, label, BLACK);
  }
  raster.rectOutline(x0, y0, x1, y1, BLACK);
  raster.text(
    Math.round((x0 + x1 - raster.textWidth(xlabel)) / 2),
    raster.height - 16,
    xlabel,
    BLACK,
  );
  // y label along the top-left corner (horizontal; vertical text is not
  // worth the complexity at this size)
  raster.text(8, y0 - 14, ylabel, BLACK);
  return frame;
}

export function drawLegend(frame: Frame, names: string[]): void {
  const { raster } = frame;
  let y = frame.y0 + 8;
  const x = frame.x0 + 10;
  names.forEach((name, i) => {
    raster.fillRect(x, y, x + 10, y + 10, seriesColor(name, i));
    raster.rectOutline(x, y, x + 10, y + 10, BLACK);
    raster.text(x + 16, y + 2, name, BLACK);
    y += 16;
  });
}

export interface CoveragePoint {
  method: string;
  level: number;
  coverage: number;
}

export function coverageChart(raster: Raster, points: CoveragePoint[], side: string): void {
  if (points.length === 0) throw new PlotError("no coverage rows to plot after filtering");
  const levels = points.map((p) => p.level);
  const xmin = Math.min(...levels) - 0.05;
  const frame = makeFrame(
    raster,
    `COVERAGE VS NOMINAL (${side === "one" ? "ONE-SIDED" : "TWO-SIDED"})`,
    "NOMINAL LEVEL",
    "COVERAGE",
    xmin,
    1.0,
    0.0,
    1.05,
  );
  // nominal reference y = x
  frame.raster.line(frame.px(xmin), frame.py(xmin), frame.px(1), frame.py(1), GRAY, 4);
  const methods = [...new Set(points.map((p) => p.method))].sort();
  methods.forEach((m, i) => {
    const color = seriesColor(m, i);
    const pts = points
      .filter((p) => p.method === m)
      .sort((a, b) => a.level - b.level)
      .map((p) => [frame.px(p.level), frame.py(p.coverage)] as const);
    for (let k = 1; k < pts.length; k++) {
      frame.raster.line(pts[k - 1][0], pts[k - 1][1], pts[k][0], pts[k][1], color);
    }
    for (const [x, y] of pts) frame.raster.disc(x, y, 3, color);
  });
  drawLegend(frame, methods);
}

export interface WidthPoint {
  method: string;
  level: number;
  meanWidth: number;
  sdWidth: number;
}

export function widthChart(raster: Raster, points: WidthPoint[]): void {
  if (points.length === 0) throw new PlotError("no width rows to plot after filtering");
  const methods = [...new Set(points.map((p) => p.method))].sort();
  const levels = [...new Set(points.map((p) => p.level))].sort((a, b) => a - b);
  const top = Math.max(...points.map((p) => p.meanWidth + p.sdWidth)) * 1.15;
  const frame = makeFrame(
    raster,
    "MEAN TWO-SIDED INTERVAL WIDTH (+-1 SD)",
    "NOMINAL LEVEL",
    "WIDTH",
    0,
    levels.length,
    0,
    top,
  );
  const groupWidth = (frame.x1 - frame.x0) / levels.length;
  const barWidth = Math.max(4, Math.floor((groupWidth * 0.7) / methods.length));
  levels.forEach((level, g) => {
    const groupLeft = frame.x0 + g * groupWidth + groupWidth * 0.15;
    methods.forEach((m, i) => {
      const pt = points.find((p) => p.method === m && p.level === level);
      if (!pt) return;
      const xa = Math.round(groupLeft + i * barWidth);
      const xb = xa + barWidth - 2;
      const yTop = frame.py(pt.meanWidth);
      raster.fillRect(xa, yTop, xb, frame.y1 - 1, seriesColor(m, i));
      const xc = Math.round((xa + xb) / 2);
      const yLo = frame.py(Math.max(0, pt.meanWidth - pt.sdWidth));
      const yHi = frame.py(pt.meanWidth + pt.sdWidth);
      raster.line(xc, yHi, xc, yLo, BLACK);
      raster.line(xc - 3, yHi, xc + 3, yHi, BLACK);
      raster.line(xc - 3, yLo, xc + 3, yLo, BLACK);
    });
    const label = fmtTick(level);
    raster.text(
      Math.round(groupLeft + (groupWidth * 0.7 - raster.textWidth(label)) / 2),
      frame.y1 + 9,
      label,
      BLACK,
    );
  });
  drawLegend(frame, methods);
}

export interface ErrorSeries {
  name: string;
  errors: number[];
}

export function ppChart(raster: Raster, series: ErrorSeries[]): void {
  if (series.every((s) => s.errors.length === 0)) {
    throw new PlotError("no standardized errors to plot");
  }
  const frame = makeFrame(
    raster,
    "PP PLOT OF STANDARDIZED ERRORS",
    "NORMAL CDF",
    "EMPIRICAL CDF",
    0,
    1,
    0,
    1.0,
  );
  frame.raster.line(frame.px(0), frame.py(0), frame.px(1), frame.py(1), GRAY, 4);
  series.forEach((s, i) => {
    const color = seriesColor(s.name, i);
    const z = [...s.errors].sort((a, b) => a - b);
    const n = z.length;
    z.forEach((zk, k) => {
      frame.raster.disc(frame.px(normalCdf(zk)), frame.py((k + 1) / n), 2, color);
    });
  });
  drawLegend(frame, series.map((s) => s.name));
}

export function qqChart(raster: Raster, series: ErrorSeries[]): void {
  if (series.every((s) => s.errors.length === 0)) {
    throw new PlotError("no standardized errors to plot");
  }
  let lo = Infinity;
  let hi = -Infinity;
  for (const s of series) {
    for (const z of s.errors) {
      lo = Math.min(lo, z);
      hi = Math.max(hi, z);
    }
  }
  const n = Math.max(...series.map((s) => s.errors.length));
  const theo = Math.abs(normalQuantile(0.5 / n));
  lo = Math.min(lo, -theo) - 0.3;
  hi = Math.max(hi, theo) + 0.3;
  const frame = makeFrame(
    raster,
    "QQ PLOT OF STANDARDIZED ERRORS",
    "NORMAL QUANTILES",
    "SAMPLE QUANTILES",
    -theo - 0.3,
    theo + 0.3,
    lo,
    hi,
  );
  frame.raster.line(
    frame.px(Math.max(lo, -theo - 0.3)),
    frame.py(Math.max(lo, -theo - 0.3)),
    frame.px(Math.min(hi, theo + 0.3)),
    frame.py(Math.min(hi, theo + 0.3)),
    GRAY,
    4,
  );
  series.forEach((s, i) => {
    const color = seriesColor(s.name, i);
    const z = [...s.errors].sort((a, b) => a - b);
    const m = z.length;
    z.forEach((zk, k) => {
      frame.raster.disc(frame.px(normalQuantile((k + 0.5) / m)), frame.py(zk), 2, color);
    });
  });
  drawLegend(frame, series.map((s) => s.name));
}

export function armHistChart(raster: Raster, fractions: number[], arm: number, bins: number): void {
  if (fractions.length === 0) throw new PlotError("no traces to plot");
  const counts = histogram(fractions, bins, 0, 1);
  const top = Math.max(...counts) * 1.15;
  const frame = makeFrame(
    raster,
    `ARM ${arm} PULL-FRACTION HISTOGRAM`,
    `FRACTION OF PULLS (MEAN ${mean(fractions).toFixed(3)})`,
    "TRACES",
    0,
    1,
    0,
    Math.max(top, 1),
  );
  const color: Color = [31, 119, 180];
  counts.forEach((count, k) => {
    if (count === 0) return;
    const xa = frame.px(k / bins) + 1;
    const xb = frame.px((k + 1) / bins) - 1;
    raster.fillRect(xa, frame.py(count), xb, frame.y1 - 1, color);
  });
}

export function blankRaster(): Raster {
  return new Raster(WIDTH, HEIGHT, WHITE);
}
