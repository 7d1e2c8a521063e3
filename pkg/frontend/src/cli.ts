#!/usr/bin/env node
/**
 * plots <kind> --in trials.csv [--summary summary.csv] --out fig.png
 *             [--filter method=W_DECORR] [--arm 0] [--bins 30]
 *             [--run run.json] [--truth 0.3]
 *
 * kinds: coverage | width | pp | qq | arm_hist
 */

import { parseArgs } from "node:util";

import { PlotError } from "./csv.js";
import { FIGURE_KINDS, FigureKind, PlotRequest, render } from "./figures.js";

export function buildRequest(argv: string[]): PlotRequest {
  const { values, positionals } = parseArgs({
    args: argv,
    allowPositionals: true,
    options: {
      in: { type: "string" },
      summary: { type: "string" },
      run: { type: "string" },
      out: { type: "string" },
      filter: { type: "string", multiple: true },
      arm: { type: "string" },
      bins: { type: "string" },
      truth: { type: "string" },
    },
  });
  if (positionals.length !== 1) {
    throw new PlotError(`expected exactly one figure kind, one of: ${FIGURE_KINDS.join(", ")}`);
  }
  const kind = positionals[0];
  if (!(FIGURE_KINDS as readonly string[]).includes(kind)) {
    throw new PlotError(`unknown figure kind '${kind}'; expected one of: ${FIGURE_KINDS.join(", ")}`);
  }
  if (!values.out) {
    throw new PlotError("missing --out path for the rendered figure");
  }
  const filters: Record<string, string> = {};
  for (const f of values.filter ?? []) {
    const idx = f.indexOf("=");
    if (idx <= 0) throw new PlotError(`bad --filter '${f}'; expected column=value`);
    filters[f.slice(0, idx)] = f.slice(idx + 1);
  }
  return {
    kind: kind as FigureKind,
    trials: values.in,
    summary: values.summary,
    run: values.run,
    out: values.out,
    filters,
    arm: values.arm ? Number(values.arm) : 0,
    bins: values.bins ? Number(values.bins) : 30,
    truth: values.truth ? Number(values.truth) : undefined,
  };
}

export function main(argv: string[]): number {
  try {
    const out = render(buildRequest(argv));
    console.log(`wrote ${out}`);
    return 0;
  } catch (err) {
    if (err instanceof PlotError) {
      console.error(`plots: ${err.message}`);
      return 1;
    }
    throw err;
  }
}

const invokedDirectly =
  process.argv[1] !== undefined && import.meta.url.endsWith(process.argv[1].split("/").pop()!);
if (invokedDirectly) {
  process.exit(main(process.argv.slice(2)));
}
