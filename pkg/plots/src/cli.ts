#!/usr/bin/env node
/**
 * plots <kind> <artifact...> -o <out.svg>
 *
 * Kinds and their inputs:
 *   heatmap       sweep.csv [operating_point.json]
 *   duration      duration.csv
 *   anticrossing  anti_crossing.csv
 *   rb            rb.csv rb_summary.json
 */
import { writeFileSync } from "node:fs";
import {
  SchemaError,
  readAntiCrossingCsv,
  readDurationCsv,
  readOperatingPoint,
  readRbCsv,
  readRbSummary,
  readSweepCsv,
} from "./schema.js";
import { renderAntiCrossing, renderDuration, renderHeatmap, renderRb } from "./render.js";

const USAGE = `usage: plots <heatmap|duration|anticrossing|rb> <artifact...> -o <out.svg>

  heatmap       sweep.csv [operating_point.json]
  duration      duration.csv
  anticrossing  anti_crossing.csv
  rb            rb.csv rb_summary.json
`;

export function render(kind: string, inputs: string[]): string {
  switch (kind) {
    case "heatmap": {
      if (inputs.length < 1 || inputs.length > 2) {
        throw new SchemaError("heatmap takes sweep.csv and an optional operating_point.json");
      }
      const grid = readSweepCsv(inputs[0]);
      const point = inputs[1] ? readOperatingPoint(inputs[1]) : undefined;
      return renderHeatmap(grid, point);
    }
    case "duration": {
      if (inputs.length !== 1) throw new SchemaError("duration takes exactly duration.csv");
      return renderDuration(readDurationCsv(inputs[0]));
    }
    case "anticrossing": {
      if (inputs.length !== 1) {
        throw new SchemaError("anticrossing takes exactly anti_crossing.csv");
      }
      return renderAntiCrossing(readAntiCrossingCsv(inputs[0]));
    }
    case "rb": {
      if (inputs.length !== 2) throw new SchemaError("rb takes rb.csv and rb_summary.json");
      return renderRb(readRbCsv(inputs[0]), readRbSummary(inputs[1]));
    }
    default:
      throw new SchemaError(`unknown plot kind '${kind}'`);
  }
}

export function main(argv: string[]): number {
  const args = [...argv];
  let out: string | undefined;
  const oIdx = args.findIndex((a) => a === "-o" || a === "--output");
  if (oIdx >= 0) {
    out = args[oIdx + 1];
    args.splice(oIdx, 2);
  }
  const [kind, ...inputs] = args;
  if (!kind || !out) {
    process.stderr.write(USAGE);
    return 2;
  }
  try {
    writeFileSync(out, render(kind, inputs));
  } catch (err) {
    if (err instanceof SchemaError) {
      process.stderr.write(`error: ${err.message}\n`);
      return 2;
    }
    throw err;
  }
  process.stdout.write(`wrote ${out}\n`);
  return 0;
}

if (process.argv[1] && process.argv[1].endsWith("cli.js")) {
  process.exit(main(process.argv.slice(2)));
}
