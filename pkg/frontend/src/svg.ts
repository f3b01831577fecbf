/**
 * Minimal deterministic SVG builder: fixed fonts, fixed precision, attributes
 * written in insertion order, no timestamps.  Byte-identical output for
 * identical inputs is part of the contract.
 */

export type Attrs = Record<string, string | number>;

export const FONT = "font-family=\"Helvetica, Arial, sans-serif\"";

export function fmt(v: number): string {
  if (!Number.isFinite(v)) throw new Error(`non-finite coordinate: ${v}`);
  const s = v.toFixed(2);
  return s === "-0.00" ? "0.00" : s;
}

function attrText(attrs: Attrs): string {
  return Object.entries(attrs)
    .map(([k, v]) => ` ${k}="${typeof v === "number" ? fmt(v) : v}"`)
    .join("");
}

export function el(tag: string, attrs: Attrs, children: string[] = []): string {
  if (children.length === 0) return `<${tag}${attrText(attrs)}/>`;
  return `<${tag}${attrText(attrs)}>${children.join("")}</${tag}>`;
}

export function escapeText(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

export function text(x: number, y: number, content: string, attrs: Attrs = {}): string {
  return el("text", { x, y, "font-size": attrs["font-size"] ?? 11, ...attrs }, [escapeText(content)]);
}

export function line(x1: number, y1: number, x2: number, y2: number, attrs: Attrs = {}): string {
  return el("line", { x1, y1, x2, y2, stroke: "#000000", "stroke-width": 1, ...attrs });
}

export function polyline(points: Array<[number, number]>, attrs: Attrs = {}): string {
  const pts = points.map(([x, y]) => `${fmt(x)},${fmt(y)}`).join(" ");
  return el("polyline", { points: pts, fill: "none", stroke: "#000000", ...attrs });
}

export function rect(x: number, y: number, w: number, h: number, attrs: Attrs = {}): string {
  return el("rect", { x, y, width: w, height: h, ...attrs });
}

export function circle(cx: number, cy: number, r: number, attrs: Attrs = {}): string {
  return el("circle", { cx, cy, r, ...attrs });
}

export function document(width: number, height: number, body: string[]): string {
  return [
    `<?xml version="1.0" encoding="UTF-8"?>`,
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" ` +
      `viewBox="0 0 ${width} ${height}" ${FONT}>`,
    rect(0, 0, width, height, { fill: "#ffffff" }),
    ...body,
    `</svg>`,
    ``,
  ].join("\n");
}

/** 9-stop viridis ramp, linearly interpolated; t clamped to [0, 1]. */
const VIRIDIS: Array<[number, number, number]> = [
  [68, 1, 84],
  [72, 40, 120],
  [62, 74, 137],
  [49, 104, 142],
  [38, 130, 142],
  [31, 158, 137],
  [53, 183, 121],
  [109, 205, 89],
  [253, 231, 37],
];

export function viridis(t: number): string {
  const u = Math.min(1, Math.max(0, t)) * (VIRIDIS.length - 1);
  const i = Math.min(VIRIDIS.length - 2, Math.floor(u));
  const f = u - i;
  const mix = (a: number, b: number) => Math.round(a + (b - a) * f);
  const [r, g, b] = [0, 1, 2].map((c) => mix(VIRIDIS[i][c], VIRIDIS[i + 1][c]));
  return `#${[r, g, b].map((v) => v.toString(16).padStart(2, "0")).join("")}`;
}

/** Text color with enough contrast over a viridis cell. */
export function onViridis(t: number): string {
  return t > 0.6 ? "#000000" : "#ffffff";
}

export const PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];
