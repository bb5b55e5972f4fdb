/**
 * Standalone figure renderer for simulator CSV output.
 *
 * Usage:
 *   tmdp-plot --input run.csv --output fig.svg [--window 200]
 *             [--players A,B] [--mode rewards|weights]
 *             [--title ...] [--ylabel ...]
 *
 * Draws one translucent curve per seed and an opaque mean curve per player
 * (rewards mode), or the posterior weight on the first mixture member
 * (weights mode, bounded to [0, 1]).
 */

import { readFileSync, writeFileSync } from "node:fs";
import { parseCsv, SchemaError } from "./csv.js";
import { meanSeries, Mode, movingAverage, players, seedSeries } from "./series.js";
import { Curve, renderSvg } from "./svg.js";

export interface PlotSpec {
  input: string;
  output: string;
  window: number;
  players: string[] | null;
  mode: Mode;
  title: string;
  ylabel: string;
}

const PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"];

export function parseArgs(argv: string[]): PlotSpec {
  const spec: PlotSpec = {
    input: "",
    output: "",
    window: 200,
    players: null,
    mode: "rewards",
    title: "",
    ylabel: "",
  };
  for (let i = 0; i < argv.length; i += 2) {
    const flag = argv[i];
    const value = argv[i + 1];
    if (value === undefined) {
      throw new RangeError(`flag ${flag} needs a value`);
    }
    switch (flag) {
      case "--input":
        spec.input = value;
        break;
      case "--output":
        spec.output = value;
        break;
      case "--window":
        spec.window = Number(value);
        break;
      case "--players":
        spec.players = value.split(",").map((p) => p.trim());
        break;
      case "--mode":
        if (value !== "rewards" && value !== "weights") {
          throw new RangeError(`unknown mode ${value}`);
        }
        spec.mode = value;
        break;
      case "--title":
        spec.title = value;
        break;
      case "--ylabel":
        spec.ylabel = value;
        break;
      default:
        throw new RangeError(`unknown flag ${flag}`);
    }
  }
  if (!spec.input || !spec.output) {
    throw new RangeError("--input and --output are required");
  }
  if (!Number.isInteger(spec.window) || spec.window < 1) {
    throw new RangeError("--window must be a positive integer");
  }
  return spec;
}

/** Build the figure SVG for `spec`; pure apart from reading the input CSV. */
export function renderToString(spec: PlotSpec): string {
  const records = parseCsv(readFileSync(spec.input, "utf-8"));
  const names = spec.players ?? players(records);
  const curves: Curve[] = [];
  const meanCurves: Curve[] = [];
  names.forEach((player, pi) => {
    const color = PALETTE[pi % PALETTE.length];
    const perSeed = [...seedSeries(records, player, spec.mode).values()].map(
      (s) => movingAverage(s, spec.window),
    );
    for (const s of perSeed) {
      curves.push({ values: s, color, opacity: 0.25, width: 1 });
    }
    meanCurves.push({
      values: meanSeries(perSeed),
      color,
      opacity: 1.0,
      width: 2.5,
    });
  });
  return renderSvg({
    curves: [...curves, ...meanCurves],
    title: spec.title,
    xlabel: "step",
    ylabel:
      spec.ylabel || (spec.mode === "weights" ? "posterior weight" : "reward"),
    yRange: spec.mode === "weights" ? [0, 1] : undefined,
  });
}

export function main(argv: string[]): number {
  try {
    const spec = parseArgs(argv);
    writeFileSync(spec.output, renderToString(spec));
    console.log(`wrote ${spec.output}`);
    return 0;
  } catch (err) {
    if (err instanceof SchemaError || err instanceof RangeError) {
      console.error(`error: ${err.message}`);
      return 2;
    }
    console.error(`error: ${String(err)}`);
    return 1;
  }
}

if (process.argv[1] && /render\.(js|ts)$/.test(process.argv[1])) {
  process.exit(main(process.argv.slice(2)));
}
