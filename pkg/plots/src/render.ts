import {
  AntiCrossingSeries,
  DurationSweep,
  RbFit,
  RbPoint,
  SweepGrid,
} from "./schema.js";
import { Svg, linearScale, fmt } from "./svg.js";

const COEFF_COLORS: Record<string, string> = {
  c1: "#1f77b4",
  c2: "#2ca02c",
  c3: "#d62728",
};

/**
 * 2-D detuning sweep as an additive two-channel heatmap: red is the control
 * population, green the target population, overlap shows yellow. A star marks
 * the calibrated operating point when one is supplied.
 */
export function renderHeatmap(
  grid: SweepGrid,
  point?: { detuning0Hz: number; detuning1Hz: number },
): string {
  const box = { left: 70, right: 470, top: 30, bottom: 430 };
  const svg = new Svg(560, 480);
  const d0 = grid.detunings0.map((v) => v / 1e6);
  const d1 = grid.detunings1.map((v) => v / 1e6);
  const n0 = d0.length;
  const n1 = d1.length;
  // cell edges midway between grid points, clamped at the boundary
  const sx = linearScale([edge(d0, 0), edge(d0, n0)], [box.left, box.right]);
  const sy = linearScale([edge(d1, 0), edge(d1, n1)], [box.bottom, box.top]);
  let maxPop = 0;
  for (let i = 0; i < n0; i++) {
    for (let j = 0; j < n1; j++) {
      maxPop = Math.max(maxPop, grid.pop0[i][j], grid.pop1[i][j]);
    }
  }
  if (maxPop <= 0) maxPop = 1;
  for (let i = 0; i < n0; i++) {
    for (let j = 0; j < n1; j++) {
      const x0 = sx(edge(d0, i));
      const x1 = sx(edge(d0, i + 1));
      const y0 = sy(edge(d1, j + 1));
      const y1 = sy(edge(d1, j));
      const r = Math.round(255 * Math.min(1, grid.pop0[i][j] / maxPop));
      const g = Math.round(255 * Math.min(1, grid.pop1[i][j] / maxPop));
      svg.rect(x0, y0, x1 - x0, y1 - y0, `rgb(${r},${g},0)`);
    }
  }
  if (point) {
    svg.star(sx(point.detuning0Hz / 1e6), sy(point.detuning1Hz / 1e6), 9, "white");
  }
  svg.axes(sx, sy, box, { x: "drive 0 detuning (MHz)", y: "drive 1 detuning (MHz)" });
  svg.text(box.left, box.top - 10, "leakage populations (red: qubit 0, green: qubit 1)", {
    size: 12,
  });
  return svg.render();
}

/** Canonical interaction coefficients against entangling-block duration. */
export function renderDuration(sweep: DurationSweep): string {
  const box = { left: 70, right: 520, top: 30, bottom: 330 };
  const svg = new Svg(600, 380);
  const allC = [...sweep.c1, ...sweep.c2, ...sweep.c3];
  const sx = linearScale(
    [Math.min(...sweep.durations), Math.max(...sweep.durations)],
    [box.left, box.right],
  );
  const sy = linearScale(pad(Math.min(...allC, 0), Math.max(...allC)), [box.bottom, box.top]);
  svg.axes(sx, sy, box, { x: "duration (samples)", y: "canonical coefficient (rad)" });
  const series: [string, number[]][] = [
    ["c1", sweep.c1],
    ["c2", sweep.c2],
    ["c3", sweep.c3],
  ];
  let ly = box.top + 14;
  for (const [name, values] of series) {
    const color = COEFF_COLORS[name];
    svg.polyline(
      sweep.durations.map((d, i) => [sx(d), sy(values[i])]),
      color,
    );
    for (let i = 0; i < sweep.durations.length; i++) {
      svg.circle(sx(sweep.durations[i]), sy(values[i]), 2.5, color);
    }
    svg.line(box.left + 12, ly - 4, box.left + 34, ly - 4, color, 2);
    svg.text(box.left + 40, ly, name);
    ly += 16;
  }
  return svg.render();
}

/** One panel per coupling strength: coefficients across the anti-crossing. */
export function renderAntiCrossing(series: AntiCrossingSeries[]): string {
  const panelW = 270;
  const panelH = 230;
  const cols = 2;
  const rows = Math.ceil(series.length / cols);
  const svg = new Svg(cols * panelW + 40, rows * panelH + 30);
  const allC = series.flatMap((s) => [...s.c1, ...s.c2, ...s.c3]);
  const yDomain = pad(Math.min(...allC, 0), Math.max(...allC));
  series.forEach((s, idx) => {
    const col = idx % cols;
    const row = Math.floor(idx / cols);
    const box = {
      left: 60 + col * panelW,
      right: 20 + (col + 1) * panelW,
      top: 30 + row * panelH,
      bottom: (row + 1) * panelH - 20,
    };
    const sx = linearScale([Math.min(...s.x), Math.max(...s.x)], [box.left, box.right]);
    const sy = linearScale(yDomain, [box.bottom, box.top]);
    svg.axes(sx, sy, box, { x: "sweep parameter", y: "coefficient (rad)" });
    for (const [name, values] of [
      ["c1", s.c1],
      ["c2", s.c2],
      ["c3", s.c3],
    ] as [string, number[]][]) {
      svg.polyline(
        s.x.map((x, i) => [sx(x), sy(values[i])]),
        COEFF_COLORS[name],
      );
    }
    svg.text(box.left, box.top - 8, `gamma = ${fmt(s.gamma)}`, { size: 12 });
  });
  return svg.render();
}

/**
 * Randomized-benchmarking survivals: per-circuit scatter plus the fitted
 * exponentials A * alpha^m + B; the interleaved curve shares A and B with
 * the reference fit.
 */
export function renderRb(points: RbPoint[], fit: RbFit): string {
  const box = { left: 70, right: 520, top: 30, bottom: 330 };
  const svg = new Svg(600, 390);
  const maxLen = Math.max(...fit.lengths, ...points.map((p) => p.length));
  const sx = linearScale([0, maxLen], [box.left, box.right]);
  const sy = linearScale([0, 1], [box.bottom, box.top]);
  svg.axes(sx, sy, box, { x: "sequence length", y: "survival probability" });
  const colors = { reference: "#1f77b4", interleaved: "#d62728" } as const;
  for (const p of points) {
    svg.circle(sx(p.length), sy(p.survival), 2.5, colors[p.series]);
  }
  const curves: [string, number][] = [["reference", fit.alpha]];
  if (fit.alphaInterleaved !== undefined) {
    curves.push(["interleaved", fit.alphaInterleaved]);
  }
  for (const [name, alpha] of curves) {
    const pts: [number, number][] = [];
    for (let i = 0; i <= 100; i++) {
      const m = (maxLen * i) / 100;
      pts.push([sx(m), sy(fit.amplitude * Math.pow(alpha, m) + fit.offset)]);
    }
    svg.polyline(pts, colors[name as keyof typeof colors], 1.5, name === "interleaved" ? "5,3" : undefined);
  }
  let ly = box.top + 14;
  for (const [name] of curves) {
    const color = colors[name as keyof typeof colors];
    svg.line(box.left + 12, ly - 4, box.left + 34, ly - 4, color, 2);
    svg.text(box.left + 40, ly, name);
    ly += 16;
  }
  if (fit.gateError !== undefined) {
    const err = fit.errorBar !== undefined ? ` +/- ${fit.errorBar.toExponential(2)}` : "";
    svg.text(box.right, box.top - 10, `gate error ${fit.gateError.toExponential(3)}${err}`, {
      anchor: "end",
      size: 12,
    });
  }
  return svg.render();
}

function edge(values: number[], i: number): number {
  const n = values.length;
  if (n === 1) return values[0] + (i === 0 ? -0.5 : 0.5);
  if (i <= 0) return values[0] - (values[1] - values[0]) / 2;
  if (i >= n) return values[n - 1] + (values[n - 1] - values[n - 2]) / 2;
  return (values[i - 1] + values[i]) / 2;
}

function pad(lo: number, hi: number): [number, number] {
  const span = hi - lo || 1;
  return [lo - 0.05 * span, hi + 0.05 * span];
}
