/**
 * Readers for the toolkit's CSV/JSON artifacts.
 *
 * Every reader validates the documented column set before returning, so a
 * schema drift in the producing CLI fails loudly here rather than rendering
 * garbage.
 */

import { readFileSync } from "node:fs";
import Papa from "papaparse";

export class SchemaError extends Error {}

function parseCsv(path: string, columns: string[]): Record<string, string>[] {
  let text: string;
  try {
    text = readFileSync(path, "utf-8");
  } catch {
    throw new SchemaError(`cannot read artifact: ${path}`);
  }
  const parsed = Papa.parse<Record<string, string>>(text.trim(), {
    header: true,
    skipEmptyLines: true,
  });
  if (parsed.errors.length > 0) {
    throw new SchemaError(`${path}: ${parsed.errors[0].message}`);
  }
  const fields = parsed.meta.fields ?? [];
  const missing = columns.filter((c) => !fields.includes(c));
  if (missing.length > 0) {
    throw new SchemaError(`${path}: missing columns ${missing.join(", ")}`);
  }
  if (parsed.data.length === 0) {
    throw new SchemaError(`${path}: no data rows`);
  }
  return parsed.data;
}

function num(row: Record<string, string>, key: string, path: string): number {
  const v = Number(row[key]);
  if (!Number.isFinite(v)) {
    throw new SchemaError(`${path}: non-numeric value '${row[key]}' in column ${key}`);
  }
  return v;
}

/** 2-D detuning sweep: populations on a rectangular (detuning0, detuning1) grid. */
export interface SweepGrid {
  detunings0: number[]; // Hz, sorted ascending
  detunings1: number[];
  pop0: number[][]; // [i0][i1]
  pop1: number[][];
}

export function readSweepCsv(path: string): SweepGrid {
  const rows = parseCsv(path, ["detuning0_hz", "detuning1_hz", "pop0", "pop1"]);
  const d0 = [...new Set(rows.map((r) => num(r, "detuning0_hz", path)))].sort((a, b) => a - b);
  const d1 = [...new Set(rows.map((r) => num(r, "detuning1_hz", path)))].sort((a, b) => a - b);
  if (rows.length !== d0.length * d1.length) {
    throw new SchemaError(`${path}: rows do not form a full ${d0.length}x${d1.length} grid`);
  }
  const i0 = new Map(d0.map((v, i) => [v, i]));
  const i1 = new Map(d1.map((v, i) => [v, i]));
  const pop0 = d0.map(() => new Array<number>(d1.length).fill(NaN));
  const pop1 = d0.map(() => new Array<number>(d1.length).fill(NaN));
  for (const r of rows) {
    const a = i0.get(num(r, "detuning0_hz", path))!;
    const b = i1.get(num(r, "detuning1_hz", path))!;
    pop0[a][b] = num(r, "pop0", path);
    pop1[a][b] = num(r, "pop1", path);
  }
  return { detunings0: d0, detunings1: d1, pop0, pop1 };
}

/** Canonical coefficients against entangling-block duration. */
export interface DurationSweep {
  durations: number[]; // samples
  c1: number[];
  c2: number[];
  c3: number[];
}

export function readDurationCsv(path: string): DurationSweep {
  const rows = parseCsv(path, ["duration_samples", "c1", "c2", "c3"]);
  return {
    durations: rows.map((r) => num(r, "duration_samples", path)),
    c1: rows.map((r) => num(r, "c1", path)),
    c2: rows.map((r) => num(r, "c2", path)),
    c3: rows.map((r) => num(r, "c3", path)),
  };
}

/** Anti-crossing model traces, one series per coupling strength gamma. */
export interface AntiCrossingSeries {
  gamma: number;
  x: number[];
  c1: number[];
  c2: number[];
  c3: number[];
}

export function readAntiCrossingCsv(path: string): AntiCrossingSeries[] {
  const rows = parseCsv(path, ["gamma", "x", "c1", "c2", "c3"]);
  const byGamma = new Map<number, AntiCrossingSeries>();
  for (const r of rows) {
    const g = num(r, "gamma", path);
    let s = byGamma.get(g);
    if (!s) {
      s = { gamma: g, x: [], c1: [], c2: [], c3: [] };
      byGamma.set(g, s);
    }
    s.x.push(num(r, "x", path));
    s.c1.push(num(r, "c1", path));
    s.c2.push(num(r, "c2", path));
    s.c3.push(num(r, "c3", path));
  }
  return [...byGamma.values()].sort((a, b) => a.gamma - b.gamma);
}

/** Per-circuit randomized-benchmarking survivals. */
export interface RbPoint {
  series: "reference" | "interleaved";
  length: number;
  survival: number;
}

export function readRbCsv(path: string): RbPoint[] {
  const rows = parseCsv(path, ["series", "length", "circuit_index", "survival"]);
  return rows.map((r) => {
    const series = r["series"];
    if (series !== "reference" && series !== "interleaved") {
      throw new SchemaError(`${path}: unknown series '${series}'`);
    }
    return { series, length: num(r, "length", path), survival: num(r, "survival", path) };
  });
}

/** Shared-offset exponential fit A * alpha^m + B, per series. */
export interface RbFit {
  lengths: number[];
  alpha: number;
  amplitude: number;
  offset: number;
  alphaInterleaved?: number;
  gateError?: number;
  errorBar?: number;
}

export function readRbSummary(path: string): RbFit {
  let raw: Record<string, unknown>;
  try {
    raw = JSON.parse(readFileSync(path, "utf-8"));
  } catch {
    throw new SchemaError(`cannot read or parse fit JSON: ${path}`);
  }
  for (const key of ["lengths", "alpha", "amplitude", "offset"]) {
    if (!(key in raw)) throw new SchemaError(`${path}: missing key '${key}'`);
  }
  return {
    lengths: raw["lengths"] as number[],
    alpha: raw["alpha"] as number,
    amplitude: raw["amplitude"] as number,
    offset: raw["offset"] as number,
    alphaInterleaved: raw["alpha_interleaved"] as number | undefined,
    gateError: raw["gate_error"] as number | undefined,
    errorBar: raw["error_bar"] as number | undefined,
  };
}

/** Calibrated operating point; only the detunings are needed for plotting. */
export function readOperatingPoint(path: string): { detuning0Hz: number; detuning1Hz: number } {
  let raw: Record<string, unknown>;
  try {
    raw = JSON.parse(readFileSync(path, "utf-8"));
  } catch {
    throw new SchemaError(`cannot read or parse operating point JSON: ${path}`);
  }
  const det = raw["detunings_hz"];
  if (!Array.isArray(det) || det.length !== 2) {
    throw new SchemaError(`${path}: missing 'detunings_hz' pair`);
  }
  return { detuning0Hz: Number(det[0]), detuning1Hz: Number(det[1]) };
}
