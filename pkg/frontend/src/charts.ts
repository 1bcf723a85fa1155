import { HistRow, PairRow, PolarRow } from "./csv.js";
import { InputError } from "./schema.js";
import { el, fmt, round, svgDocument, text } from "./svg.js";

export interface ChartOptions {
  title?: string;
  color?: string;
}

const WIDTH = 640;
const HEIGHT = 420;
const MARGIN = { top: 44, right: 24, bottom: 48, left: 64 };
const INNER_W = WIDTH - MARGIN.left - MARGIN.right;
const INNER_H = HEIGHT - MARGIN.top - MARGIN.bottom;

const BAR_COLOR = "#4878a8";
const PAIR_COLORS = ["#4878a8", "#d1605e", "#6aa84f", "#8e63ce"];
const AXIS = "#333333";
const GRID = "#cccccc";

type Scale = (value: number) => number;

function linear(d0: number, d1: number, r0: number, r1: number): Scale {
  const span = d1 - d0;
  if (span === 0) {
    return () => (r0 + r1) / 2;
  }
  return (value) => r0 + ((value - d0) / span) * (r1 - r0);
}

function ticks(lo: number, hi: number, n: number): number[] {
  if (hi === lo) return [lo];
  const out: number[] = [];
  for (let i = 0; i <= n; i++) {
    out.push(lo + ((hi - lo) * i) / n);
  }
  return out;
}

function frame(title: string | undefined, xLabelParts: string[], yLabelParts: string[]): string[] {
  const parts: string[] = [];
  if (title) {
    parts.push(text(WIDTH / 2, MARGIN.top - 18, title, { "text-anchor": "middle", "font-size": 15 }));
  }
  parts.push(
    el("line", {
      x1: MARGIN.left,
      y1: MARGIN.top + INNER_H,
      x2: MARGIN.left + INNER_W,
      y2: MARGIN.top + INNER_H,
      stroke: AXIS,
    }),
    el("line", { x1: MARGIN.left, y1: MARGIN.top, x2: MARGIN.left, y2: MARGIN.top + INNER_H, stroke: AXIS }),
  );
  parts.push(...xLabelParts, ...yLabelParts);
  return parts;
}

function xAxisTicks(sx: Scale, lo: number, hi: number): string[] {
  const parts: string[] = [];
  for (const t of ticks(lo, hi, 4)) {
    const px = sx(t);
    parts.push(el("line", { x1: round(px), y1: MARGIN.top + INNER_H, x2: round(px), y2: MARGIN.top + INNER_H + 5, stroke: AXIS }));
    parts.push(text(px, MARGIN.top + INNER_H + 20, fmt(t), { "text-anchor": "middle" }));
  }
  return parts;
}

function yAxisTicks(sy: Scale, lo: number, hi: number): string[] {
  const parts: string[] = [];
  for (const t of ticks(lo, hi, 4)) {
    const py = sy(t);
    parts.push(el("line", { x1: MARGIN.left - 5, y1: round(py), x2: MARGIN.left, y2: round(py), stroke: AXIS }));
    parts.push(el("line", { x1: MARGIN.left, y1: round(py), x2: MARGIN.left + INNER_W, y2: round(py), stroke: GRID, "stroke-dasharray": "2,4" }));
    parts.push(text(MARGIN.left - 9, py + 4, fmt(t), { "text-anchor": "end" }));
  }
  return parts;
}

/**
 * One rect per CSV row, spanning [bin_lo, bin_hi] horizontally. A single-row
 * input therefore yields a single bar covering the whole x range.
 */
export function renderHist(rows: HistRow[], opts: ChartOptions = {}): string {
  if (rows.length === 0) {
    throw new InputError("histogram has no bins");
  }
  const xLo = Math.min(...rows.map((r) => r.binLo));
  const xHi = Math.max(...rows.map((r) => r.binHi));
  const yHi = Math.max(1, ...rows.map((r) => r.count));
  const sx = linear(xLo, xHi, MARGIN.left, MARGIN.left + INNER_W);
  const sy = linear(0, yHi, MARGIN.top + INNER_H, MARGIN.top);
  const color = opts.color ?? BAR_COLOR;

  const parts = frame(opts.title, xAxisTicks(sx, xLo, xHi), yAxisTicks(sy, 0, yHi));
  for (const row of rows) {
    const x = sx(row.binLo);
    const w = Math.max(sx(row.binHi) - x, 0.5);
    const y = sy(row.count);
    parts.push(
      el("rect", {
        class: "bar",
        x: round(x),
        y: round(y),
        width: round(w),
        height: round(MARGIN.top + INNER_H - y),
        fill: color,
        stroke: "#ffffff",
        "stroke-width": 0.5,
      }),
    );
  }
  return svgDocument(WIDTH, HEIGHT, parts);
}

/**
 * One circle per CSV row at (radius, angle). Radii map linearly onto the
 * disc; a log-scale export can carry negative radii, so the domain floor is
 * min(0, smallest radius) rather than a hard zero.
 */
export function renderPolarScatter(rows: PolarRow[], opts: ChartOptions = {}): string {
  if (rows.length === 0) {
    throw new InputError("polar scatter has no points");
  }
  const rLo = Math.min(0, ...rows.map((r) => r.radius));
  const rHi = Math.max(...rows.map((r) => r.radius));
  const R = Math.min(INNER_W, INNER_H) / 2;
  const cx = MARGIN.left + INNER_W / 2;
  const cy = MARGIN.top + INNER_H / 2;
  const sr = linear(rLo, rHi === rLo ? rLo + 1 : rHi, 0, R);
  const color = opts.color ?? BAR_COLOR;

  const parts: string[] = [];
  if (opts.title) {
    parts.push(text(WIDTH / 2, MARGIN.top - 18, opts.title, { "text-anchor": "middle", "font-size": 15 }));
  }
  for (const frac of [1 / 3, 2 / 3, 1]) {
    parts.push(el("circle", { cx, cy, r: round(R * frac), fill: "none", stroke: GRID }));
  }
  for (let spoke = 0; spoke < 8; spoke++) {
    const a = (spoke * Math.PI) / 4;
    parts.push(
      el("line", {
        x1: cx,
        y1: cy,
        x2: round(cx + R * Math.cos(a)),
        y2: round(cy - R * Math.sin(a)),
        stroke: GRID,
      }),
    );
  }
  for (const frac of [1 / 3, 2 / 3, 1]) {
    const value = rLo + (rHi === rLo ? 1 : rHi - rLo) * frac;
    parts.push(text(cx + R * frac, cy - 4, fmt(value), { "font-size": 10, fill: "#666666" }));
  }
  for (const row of rows) {
    const rr = sr(row.radius);
    parts.push(
      el("circle", {
        class: "pt",
        cx: round(cx + rr * Math.cos(row.angle)),
        cy: round(cy - rr * Math.sin(row.angle)),
        r: 2.5,
        fill: color,
        "fill-opacity": 0.55,
      }),
    );
  }
  return svgDocument(WIDTH, HEIGHT, parts);
}

function capitalize(label: string): string {
  return label.length === 0 ? label : label[0]!.toUpperCase() + label.slice(1);
}

/**
 * Overlaid integer-bin histograms, one series per distinct label. Bins are
 * shared across series: every integer from min(diff_signs) to max. Only
 * occupied (label, value) bins emit a bar, so the bar count in the output
 * equals the number of distinct (label, diff_signs) pairs in the CSV.
 */
export function renderPairedHist(rows: PairRow[], opts: ChartOptions = {}): string {
  if (rows.length === 0) {
    throw new InputError("paired histogram has no rows");
  }
  const labels: string[] = [];
  for (const row of rows) {
    if (!labels.includes(row.label)) labels.push(row.label);
  }
  const counts = new Map<string, Map<number, number>>(labels.map((l) => [l, new Map()]));
  for (const row of rows) {
    const byValue = counts.get(row.label)!;
    byValue.set(row.diffSigns, (byValue.get(row.diffSigns) ?? 0) + 1);
  }

  const vLo = Math.min(...rows.map((r) => r.diffSigns));
  const vHi = Math.max(...rows.map((r) => r.diffSigns));
  const yHi = Math.max(1, ...[...counts.values()].flatMap((m) => [...m.values()]));
  // one slot per integer; bars are centered on the integer and fill 80% of it
  const sx = linear(vLo - 0.5, vHi + 0.5, MARGIN.left, MARGIN.left + INNER_W);
  const sy = linear(0, yHi, MARGIN.top + INNER_H, MARGIN.top);
  const slot = sx(1.5) - sx(0.5);

  const parts = frame(opts.title, xAxisTicks(sx, vLo, vHi), yAxisTicks(sy, 0, yHi));
  labels.forEach((label, li) => {
    const color = li === 0 && opts.color ? opts.color : PAIR_COLORS[li % PAIR_COLORS.length]!;
    for (const [value, count] of [...counts.get(label)!.entries()].sort((a, b) => a[0] - b[0])) {
      const center = sx(value);
      const y = sy(count);
      parts.push(
        el("rect", {
          class: `bar ${label}`,
          x: round(center - slot * 0.4),
          y: round(y),
          width: round(slot * 0.8),
          height: round(MARGIN.top + INNER_H - y),
          fill: color,
          "fill-opacity": 0.55,
        }),
      );
    }
  });

  // legend, top right, capitalized display labels
  labels.forEach((label, li) => {
    const color = li === 0 && opts.color ? opts.color : PAIR_COLORS[li % PAIR_COLORS.length]!;
    const y = MARGIN.top + 8 + li * 18;
    const x = MARGIN.left + INNER_W - 110;
    parts.push(el("rect", { class: "legend-swatch", x, y: y - 10, width: 12, height: 12, fill: color, "fill-opacity": 0.55 }));
    parts.push(text(x + 18, y, capitalize(label), { class: "legend" }));
  });
  return svgDocument(WIDTH, HEIGHT, parts);
}
