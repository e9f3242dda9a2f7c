/**
 * SVG figure generation for convergence and truncation studies.
 *
 * Convergence figures are log-log error-vs-n plots with one series per
 * value of a grouping column and dashed reference lines of fixed slope.
 * Truncation figures plot the error against the domain cutoff with a
 * logarithmic y axis only.  The geometry (pixel coordinates of every
 * marker and reference line) is returned alongside the SVG markup so the
 * tests can verify collinearity exactly.
 */

import { COLUMNS, ColumnName, ResultRow } from "./csv";

export type PlotKind = "convergence" | "truncation";

export interface PlotSpec {
  kind: PlotKind;
  groupBy?: string;
  referenceSlopes?: number[];
}

export interface Point {
  x: number;
  y: number;
}

export interface Series {
  label: string;
  points: Point[]; // data space
}

export interface ReferenceLine {
  slope: number;
  start: Point; // pixel space
  end: Point;
}

export interface Figure {
  svg: string;
  pixelSeries: Map<string, Point[]>;
  referenceLines: ReferenceLine[];
}

const WIDTH = 720;
const HEIGHT = 540;
const MARGIN = { left: 80, right: 30, top: 30, bottom: 60 };
const PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

function groupKey(row: ResultRow, column: ColumnName): string {
  return String(row[column]);
}

export function buildSeries(rows: ResultRow[], xColumn: "n" | "cutoff", groupBy?: string): Series[] {
  if (groupBy !== undefined && !COLUMNS.includes(groupBy as ColumnName)) {
    throw new Error(`grouping column ${JSON.stringify(groupBy)} is not in the CSV header`);
  }
  const usable = rows.filter(
    (r) => Number.isFinite(r[xColumn]) && Number.isFinite(r.err_weighted) && r.err_weighted > 0,
  );
  if (usable.length === 0) {
    throw new Error("no plottable rows (finite positive err_weighted required)");
  }
  const buckets = new Map<string, ResultRow[]>();
  for (const row of usable) {
    const key = groupBy === undefined ? "all" : groupKey(row, groupBy as ColumnName);
    const bucket = buckets.get(key);
    if (bucket === undefined) {
      buckets.set(key, [row]);
    } else {
      bucket.push(row);
    }
  }
  return [...buckets.entries()].map(([label, bucket]) => ({
    label,
    points: bucket
      .map((r) => ({ x: r[xColumn], y: r.err_weighted }))
      .sort((a, b) => a.x - b.x),
  }));
}

interface Axis {
  toPixel(value: number): number;
  ticks: number[];
  label: string;
  log: boolean;
}

function makeAxis(
  values: number[],
  pixelRange: [number, number],
  log: boolean,
  label: string,
): Axis {
  const transformed = values.map((v) => (log ? Math.log10(v) : v));
  let lo = Math.min(...transformed);
  let hi = Math.max(...transformed);
  if (hi === lo) {
    lo -= 0.5;
    hi += 0.5;
  }
  const pad = 0.05 * (hi - lo);
  lo -= pad;
  hi += pad;
  const [p0, p1] = pixelRange;
  const toPixel = (value: number) => {
    const t = ((log ? Math.log10(value) : value) - lo) / (hi - lo);
    return p0 + t * (p1 - p0);
  };
  let ticks: number[];
  if (log) {
    ticks = [];
    for (let d = Math.ceil(lo); d <= Math.floor(hi); d += 1) {
      ticks.push(Math.pow(10, d));
    }
    if (ticks.length < 2) {
      ticks = [...new Set(values)].sort((a, b) => a - b);
    }
  } else {
    ticks = [...new Set(values)].sort((a, b) => a - b);
  }
  return { toPixel, ticks, label, log };
}

function formatTick(value: number, log: boolean): string {
  if (log) {
    const exp = Math.log10(value);
    if (Number.isInteger(exp)) {
      return `1e${exp}`;
    }
  }
  return String(value);
}

function svgEscape(text: string): string {
  return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

function renderFigure(
  series: Series[],
  xAxis: Axis,
  yAxis: Axis,
  referenceSlopes: number[],
  title: string,
): Figure {
  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" viewBox="0 0 ${WIDTH} ${HEIGHT}">`,
    `<rect width="${WIDTH}" height="${HEIGHT}" fill="white"/>`,
    `<text x="${WIDTH / 2}" y="18" text-anchor="middle" font-family="sans-serif" font-size="14">${svgEscape(title)}</text>`,
  );
  // axes
  const x0 = MARGIN.left;
  const x1 = WIDTH - MARGIN.right;
  const y0 = HEIGHT - MARGIN.bottom;
  const y1 = MARGIN.top;
  parts.push(
    `<line x1="${x0}" y1="${y0}" x2="${x1}" y2="${y0}" stroke="black"/>`,
    `<line x1="${x0}" y1="${y0}" x2="${x0}" y2="${y1}" stroke="black"/>`,
  );
  for (const tick of xAxis.ticks) {
    const px = xAxis.toPixel(tick);
    parts.push(
      `<line x1="${px}" y1="${y0}" x2="${px}" y2="${y0 + 5}" stroke="black"/>`,
      `<text x="${px}" y="${y0 + 20}" text-anchor="middle" font-family="sans-serif" font-size="11">${formatTick(tick, xAxis.log)}</text>`,
    );
  }
  for (const tick of yAxis.ticks) {
    const py = yAxis.toPixel(tick);
    parts.push(
      `<line x1="${x0 - 5}" y1="${py}" x2="${x0}" y2="${py}" stroke="black"/>`,
      `<text x="${x0 - 8}" y="${py + 4}" text-anchor="end" font-family="sans-serif" font-size="11">${formatTick(tick, yAxis.log)}</text>`,
    );
  }
  parts.push(
    `<text x="${(x0 + x1) / 2}" y="${HEIGHT - 12}" text-anchor="middle" font-family="sans-serif" font-size="12">${svgEscape(xAxis.label)}</text>`,
    `<text x="20" y="${(y0 + y1) / 2}" text-anchor="middle" font-family="sans-serif" font-size="12" transform="rotate(-90 20 ${(y0 + y1) / 2})">${svgEscape(yAxis.label)}</text>`,
  );

  const pixelSeries = new Map<string, Point[]>();
  series.forEach((s, i) => {
    const color = PALETTE[i % PALETTE.length];
    const pixels = s.points.map((p) => ({ x: xAxis.toPixel(p.x), y: yAxis.toPixel(p.y) }));
    pixelSeries.set(s.label, pixels);
    const path = pixels.map((p) => `${p.x},${p.y}`).join(" ");
    parts.push(`<polyline points="${path}" fill="none" stroke="${color}" stroke-width="1.5"/>`);
    for (const p of pixels) {
      parts.push(`<circle cx="${p.x}" cy="${p.y}" r="3.5" fill="${color}"/>`);
    }
    parts.push(
      `<text x="${x1 - 8}" y="${y1 + 16 + 16 * i}" text-anchor="end" font-family="sans-serif" font-size="12" fill="${color}">${svgEscape(s.label)}</text>`,
    );
  });

  // dashed reference lines, anchored at the first point of the first series
  const referenceLines: ReferenceLine[] = [];
  if (referenceSlopes.length > 0 && series.length > 0 && xAxis.log && yAxis.log) {
    const anchor = series[0].points[0];
    const xs = series.flatMap((s) => s.points.map((p) => p.x));
    const xMin = Math.min(...xs);
    const xMax = Math.max(...xs);
    for (const slope of referenceSlopes) {
      const yAt = (x: number) => anchor.y * Math.pow(x / anchor.x, -slope);
      const start = { x: xAxis.toPixel(xMin), y: yAxis.toPixel(yAt(xMin)) };
      const end = { x: xAxis.toPixel(xMax), y: yAxis.toPixel(yAt(xMax)) };
      referenceLines.push({ slope, start, end });
      parts.push(
        `<line x1="${start.x}" y1="${start.y}" x2="${end.x}" y2="${end.y}" stroke="gray" stroke-dasharray="6 4"/>`,
        `<text x="${end.x}" y="${end.y - 6}" text-anchor="end" font-family="sans-serif" font-size="11" fill="gray">slope -${slope}</text>`,
      );
    }
  }

  parts.push("</svg>");
  return { svg: parts.join("\n"), pixelSeries, referenceLines };
}

export function plotConvergence(rows: ResultRow[], spec: PlotSpec): Figure {
  const groupBy = spec.groupBy ?? "scheme";
  const series = buildSeries(rows, "n", groupBy);
  const xs = series.flatMap((s) => s.points.map((p) => p.x));
  const ys = series.flatMap((s) => s.points.map((p) => p.y));
  const xAxis = makeAxis(xs, [MARGIN.left, WIDTH - MARGIN.right], true, "timesteps n");
  const yAxis = makeAxis(ys, [HEIGHT - MARGIN.bottom, MARGIN.top], true, "weighted error");
  return renderFigure(
    series,
    xAxis,
    yAxis,
    spec.referenceSlopes ?? [4],
    `error vs timesteps (grouped by ${groupBy})`,
  );
}

export function plotTruncation(rows: ResultRow[], spec: PlotSpec): Figure {
  const series = buildSeries(rows, "cutoff", spec.groupBy);
  const xs = series.flatMap((s) => s.points.map((p) => p.x));
  const ys = series.flatMap((s) => s.points.map((p) => p.y));
  const xAxis = makeAxis(xs, [MARGIN.left, WIDTH - MARGIN.right], false, "domain cutoff");
  const yAxis = makeAxis(ys, [HEIGHT - MARGIN.bottom, MARGIN.top], true, "weighted error");
  return renderFigure(series, xAxis, yAxis, [], "error vs domain cutoff");
}

export function renderPlot(rows: ResultRow[], spec: PlotSpec): Figure {
  if (spec.kind === "convergence") {
    return plotConvergence(rows, spec);
  }
  if (spec.kind === "truncation") {
    return plotTruncation(rows, spec);
  }
  throw new Error(`unknown plot kind ${JSON.stringify(spec.kind)}`);
}
