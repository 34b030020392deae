/**
 * Minimal deterministic SVG builder: fixed number formatting, no timestamps,
 * no randomness, so identical inputs give byte-identical files.
 */

export function fmt(v: number): string {
  if (!Number.isFinite(v)) return "0";
  const s = v.toFixed(2);
  return s === "-0.00" ? "0.00" : s;
}

export interface Scale {
  (v: number): number;
  domain: [number, number];
}

export function linearScale(domain: [number, number], range: [number, number]): Scale {
  const [d0, d1] = domain;
  const [r0, r1] = range;
  const k = d1 === d0 ? 0 : (r1 - r0) / (d1 - d0);
  const f = ((v: number) => r0 + (v - d0) * k) as Scale;
  f.domain = domain;
  return f;
}

/** Round tick positions covering the domain, at most n of them. */
export function ticks(domain: [number, number], n = 6): number[] {
  const [lo, hi] = domain;
  if (!(hi > lo)) return [lo];
  const rawStep = (hi - lo) / n;
  const mag = Math.pow(10, Math.floor(Math.log10(rawStep)));
  const step = [1, 2, 5, 10].map((m) => m * mag).find((s) => (hi - lo) / s <= n) ?? 10 * mag;
  const out: number[] = [];
  for (let v = Math.ceil(lo / step) * step; v <= hi + 1e-9 * step; v += step) {
    out.push(Math.abs(v) < 1e-9 * step ? 0 : v);
  }
  return out;
}

export class Svg {
  private parts: string[] = [];

  constructor(readonly width: number, readonly height: number) {
    this.parts.push(
      `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" ` +
        `viewBox="0 0 ${width} ${height}" font-family="Helvetica, sans-serif">`,
    );
    this.parts.push(`<rect width="${width}" height="${height}" fill="white"/>`);
  }

  rect(x: number, y: number, w: number, h: number, fill: string): void {
    this.parts.push(
      `<rect x="${fmt(x)}" y="${fmt(y)}" width="${fmt(w)}" height="${fmt(h)}" fill="${fill}"/>`,
    );
  }

  line(x1: number, y1: number, x2: number, y2: number, stroke: string, width = 1): void {
    this.parts.push(
      `<line x1="${fmt(x1)}" y1="${fmt(y1)}" x2="${fmt(x2)}" y2="${fmt(y2)}" ` +
        `stroke="${stroke}" stroke-width="${width}"/>`,
    );
  }

  polyline(points: [number, number][], stroke: string, width = 1.5, dash?: string): void {
    const pts = points.map(([x, y]) => `${fmt(x)},${fmt(y)}`).join(" ");
    const dashAttr = dash ? ` stroke-dasharray="${dash}"` : "";
    this.parts.push(
      `<polyline points="${pts}" fill="none" stroke="${stroke}" stroke-width="${width}"${dashAttr}/>`,
    );
  }

  circle(x: number, y: number, r: number, fill: string): void {
    this.parts.push(`<circle cx="${fmt(x)}" cy="${fmt(y)}" r="${fmt(r)}" fill="${fill}"/>`);
  }

  text(
    x: number,
    y: number,
    s: string,
    opts: { size?: number; anchor?: string; fill?: string; rotate?: boolean } = {},
  ): void {
    const { size = 11, anchor = "start", fill = "black", rotate = false } = opts;
    const transform = rotate ? ` transform="rotate(-90 ${fmt(x)} ${fmt(y)})"` : "";
    this.parts.push(
      `<text x="${fmt(x)}" y="${fmt(y)}" font-size="${size}" text-anchor="${anchor}" ` +
        `fill="${fill}"${transform}>${escapeXml(s)}</text>`,
    );
  }

  /** Five-pointed star marker, used for the calibrated operating point. */
  star(x: number, y: number, r: number, fill: string): void {
    const pts: [number, number][] = [];
    for (let i = 0; i < 10; i++) {
      const rad = i % 2 === 0 ? r : r * 0.4;
      const a = -Math.PI / 2 + (i * Math.PI) / 5;
      pts.push([x + rad * Math.cos(a), y + rad * Math.sin(a)]);
    }
    const d = pts.map(([px, py]) => `${fmt(px)},${fmt(py)}`).join(" ");
    this.parts.push(`<polygon points="${d}" fill="${fill}" stroke="black" stroke-width="0.8"/>`);
  }

  /** Left and bottom axes with tick labels, for data drawn via the scales. */
  axes(
    sx: Scale,
    sy: Scale,
    box: { left: number; right: number; top: number; bottom: number },
    labels: { x: string; y: string },
  ): void {
    this.line(box.left, box.bottom, box.right, box.bottom, "black");
    this.line(box.left, box.top, box.left, box.bottom, "black");
    for (const t of ticks(sx.domain)) {
      const px = sx(t);
      this.line(px, box.bottom, px, box.bottom + 4, "black");
      this.text(px, box.bottom + 16, trimTick(t), { anchor: "middle" });
    }
    for (const t of ticks(sy.domain)) {
      const py = sy(t);
      this.line(box.left - 4, py, box.left, py, "black");
      this.text(box.left - 7, py + 4, trimTick(t), { anchor: "end" });
    }
    this.text((box.left + box.right) / 2, box.bottom + 32, labels.x, { anchor: "middle" });
    this.text(box.left - 38, (box.top + box.bottom) / 2, labels.y, {
      anchor: "middle",
      rotate: true,
    });
  }

  render(): string {
    return this.parts.join("\n") + "\n</svg>\n";
  }
}

function trimTick(v: number): string {
  const s = v.toPrecision(6);
  return String(Number(s));
}

function escapeXml(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}
