#!/usr/bin/env node
/**
 * repq-plot -- render SVG figures from simulator CSV outputs.
 *
 * Usage:
 *   repq-plot <bars|sweep|trajectories|census|heatmap> --in FILE [FILE...]
 *             --out FILE.svg [--field rule|norm] [--title T]
 *             [--xlabel X] [--ylabel Y]
 *
 * bars / sweep / heatmap read a sweep.csv; trajectories / census read one
 * or more episodes.csv files. Output format follows the --out extension
 * (SVG is the supported format). Identical inputs produce identical bytes.
 */

import { readFileSync, writeFileSync, mkdirSync } from "fs";
import { dirname, extname } from "path";
import { EmptyInputError, SchemaError, Table, parseCsv } from "./csv.js";
import {
  renderBars,
  renderCensus,
  renderHeatmap,
  renderSweep,
  renderTrajectories,
} from "./figures.js";

const KINDS = ["bars", "sweep", "trajectories", "census", "heatmap"] as const;
type Kind = (typeof KINDS)[number];

export class UsageError extends Error {}

interface Args {
  kind: Kind;
  inputs: string[];
  out: string;
  field: "rule" | "norm";
  title?: string;
  xLabel?: string;
  yLabel?: string;
}

export function parseArgs(argv: string[]): Args {
  if (argv.length === 0) {
    throw new UsageError(`usage: repq-plot <${KINDS.join("|")}> --in FILE... --out FILE.svg`);
  }
  const kind = argv[0] as Kind;
  if (!KINDS.includes(kind)) {
    throw new UsageError(`unknown figure kind '${argv[0]}' (expected one of: ${KINDS.join(", ")})`);
  }
  const args: Args = { kind, inputs: [], out: "", field: "rule" };
  let i = 1;
  while (i < argv.length) {
    const flag = argv[i];
    switch (flag) {
      case "--in":
        i++;
        while (i < argv.length && !argv[i].startsWith("--")) {
          args.inputs.push(argv[i]);
          i++;
        }
        break;
      case "--out":
        args.out = argv[++i] ?? "";
        i++;
        break;
      case "--field": {
        const value = argv[++i];
        if (value !== "rule" && value !== "norm") {
          throw new UsageError(`--field must be 'rule' or 'norm', got '${value}'`);
        }
        args.field = value;
        i++;
        break;
      }
      case "--title":
        args.title = argv[++i];
        i++;
        break;
      case "--xlabel":
        args.xLabel = argv[++i];
        i++;
        break;
      case "--ylabel":
        args.yLabel = argv[++i];
        i++;
        break;
      default:
        throw new UsageError(`unknown flag '${flag}'`);
    }
  }
  if (args.inputs.length === 0) {
    throw new UsageError("at least one --in file is required");
  }
  if (!args.out) {
    throw new UsageError("--out is required");
  }
  const ext = extname(args.out).toLowerCase();
  if (ext !== ".svg") {
    throw new UsageError(`unsupported output format '${ext || "(none)"}' (supported: .svg)`);
  }
  return args;
}

export function renderFromArgs(args: Args): string {
  const tables: Table[] = args.inputs.map((path) =>
    parseCsv(readFileSync(path, "utf-8"), path)
  );
  const labels = { title: args.title, xLabel: args.xLabel, yLabel: args.yLabel };
  switch (args.kind) {
    case "bars":
      return renderBars(tables[0], labels);
    case "sweep":
      return renderSweep(tables[0], labels);
    case "trajectories":
      return renderTrajectories(tables, labels);
    case "census":
      return renderCensus(tables, args.field, labels);
    case "heatmap":
      return renderHeatmap(tables[0], labels);
  }
}

export function main(argv: string[]): number {
  let args: Args;
  try {
    args = parseArgs(argv);
  } catch (err) {
    if (err instanceof UsageError) {
      console.error(`error: ${err.message}`);
      return 2;
    }
    throw err;
  }
  try {
    const svg = renderFromArgs(args);
    mkdirSync(dirname(args.out), { recursive: true });
    writeFileSync(args.out, svg, "utf-8");
    console.log(`wrote ${args.out}`);
    return 0;
  } catch (err) {
    if (err instanceof SchemaError || err instanceof EmptyInputError) {
      console.error(`error: ${err.message}`);
      return 1;
    }
    if (err instanceof Error && "code" in err) {
      console.error(`error: ${err.message}`);
      return 1;
    }
    throw err;
  }
}

// invoked directly (not imported by tests)
if (process.argv[1] && /plot\.(ts|js)$/.test(process.argv[1])) {
  process.exit(main(process.argv.slice(2)));
}
