/**
 * Figure renderers over a completed run directory.
 *
 *   timeseries      per-realization QBER with mean line and histogram inset
 *   sweep           QBER / key-rate vs the swept axis with error bars
 *   order-sweep     sweep specialised to the Zernike order axis (N)
 *   aperture-sweep  sweep specialised to the receiver aperture axis (R)
 *   delay-sweep     sweep specialised to wind speed (v) with loop-time guides
 *   heatmap         mean crosstalk matrix of one basis
 *   spectrum        mean azimuthal power spectrum per input letter
 *
 * All renderers are pure functions of the input files; the SVG text they
 * return is byte-identical across re-runs.
 */

import * as fs from "node:fs";
import * as path from "node:path";

import {
  Manifest,
  readCrosstalk,
  readManifest,
  readRecords,
  readSpectrum,
  readSweep,
  SweepRow,
} from "./csv.js";
import { qberThreshold } from "./keyrate.js";
import { extent, linear, padded, Scale, tickLabel, ticks } from "./scale.js";
import { circle, document, line, PALETTE, polyline, rect, text, viridis, onViridis } from "./svg.js";

export const FIGURE_KINDS = [
  "timeseries",
  "sweep",
  "order-sweep",
  "aperture-sweep",
  "delay-sweep",
  "heatmap",
  "spectrum",
] as const;

export type FigureKind = (typeof FIGURE_KINDS)[number];

export interface RenderOptions {
  runDir: string;
  kind: FigureKind;
  /** heatmap only: which basis to draw (default "oam") */
  basis?: "oam" | "ang";
}

const W = 680;
const H = 440;
const AXIS_LABELS: Record<string, string> = {
  r0: "Fried parameter r0 (m)",
  Cn2: "Cn2 (m^-2/3)",
  N: "Zernike correction order N",
  R: "receiver aperture R (m)",
  v: "wind speed v (m/s)",
  d: "alphabet size d",
};

interface Box {
  x0: number;
  y0: number;
  x1: number;
  y1: number;
}

function frame(box: Box): string {
  return rect(box.x0, box.y0, box.x1 - box.x0, box.y1 - box.y0, {
    fill: "none",
    stroke: "#000000",
    "stroke-width": 1,
  });
}

function xAxis(box: Box, scale: Scale, label: string): string[] {
  const tk = ticks(scale.domain);
  const step = tk.length > 1 ? tk[1] - tk[0] : 1;
  const out: string[] = [];
  for (const v of tk) {
    const x = scale.map(v);
    out.push(line(x, box.y1, x, box.y1 + 4));
    out.push(text(x, box.y1 + 16, tickLabel(v, step), { "text-anchor": "middle" }));
  }
  out.push(
    text((box.x0 + box.x1) / 2, box.y1 + 32, label, { "text-anchor": "middle", "font-size": 12 })
  );
  return out;
}

function yAxis(box: Box, scale: Scale, label: string): string[] {
  const tk = ticks(scale.domain, 6);
  const step = tk.length > 1 ? tk[1] - tk[0] : 1;
  const out: string[] = [];
  for (const v of tk) {
    const y = scale.map(v);
    out.push(line(box.x0 - 4, y, box.x0, y));
    out.push(line(box.x0, y, box.x1, y, { stroke: "#dddddd", "stroke-width": 0.5 }));
    out.push(text(box.x0 - 7, y + 3.5, tickLabel(v, step), { "text-anchor": "end" }));
  }
  const cx = box.x0 - 44;
  const cy = (box.y0 + box.y1) / 2;
  out.push(
    text(cx, cy, label, {
      "text-anchor": "middle",
      "font-size": 12,
      transform: `rotate(-90 ${cx.toFixed(2)} ${cy.toFixed(2)})`,
    })
  );
  return out;
}

function errorBar(x: number, yLo: number, yHi: number, color: string): string[] {
  return [
    line(x, yLo, x, yHi, { stroke: color }),
    line(x - 3, yLo, x + 3, yLo, { stroke: color }),
    line(x - 3, yHi, x + 3, yHi, { stroke: color }),
  ];
}

// ---------------------------------------------------------------------------
// timeseries
// ---------------------------------------------------------------------------

function renderTimeseries(runDir: string): string {
  const records = readRecords(path.join(runDir, "records.csv"));
  if (records.length === 0) throw new Error(`${runDir}: records.csv has no rows`);
  const manifest = readManifest(runDir);
  const d = manifest.config.protocol.d;
  const threshold = 100 * qberThreshold(d);

  const q = records.map((r) => 100 * r.Q);
  const t = records.map((r) => r.t);
  const mean = q.reduce((a, b) => a + b, 0) / q.length;

  const main: Box = { x0: 62, y0: 40, x1: 490, y1: H - 50 };
  const inset: Box = { x0: 512, y0: 40, x1: W - 16, y1: H - 50 };
  const yDom: [number, number] = [0, Math.max(Math.max(...q), threshold) * 1.12];
  const xs = linear(padded(extent(t), 0.03), [main.x0, main.x1]);
  const ys = linear(yDom, [main.y1, main.y0]);

  const body: string[] = [];
  body.push(...yAxis(main, ys, "QBER (%)"));
  body.push(...xAxis(main, xs, "time (s)"));

  const pts: Array<[number, number]> = t.map((ti, k) => [xs.map(ti), ys.map(q[k])]);
  if (pts.length > 1) body.push(polyline(pts, { stroke: PALETTE[0], "stroke-width": 0.8, "stroke-opacity": 0.55 }));
  for (const [px, py] of pts) body.push(circle(px, py, 2.2, { fill: PALETTE[0] }));

  const yThr = ys.map(threshold);
  body.push(line(main.x0, yThr, main.x1, yThr, { stroke: "#000000" }));
  body.push(text(main.x0 + 6, yThr - 5, `r_min = 0 at Q = ${threshold.toFixed(1)}%`, { "font-size": 10 }));
  const yMean = ys.map(mean);
  body.push(line(main.x0, yMean, main.x1, yMean, { stroke: PALETTE[1], "stroke-dasharray": "6 3" }));
  body.push(text(main.x0 + 6, yMean - 5, `mean ${mean.toFixed(2)}%`, { "font-size": 10, fill: PALETTE[1] }));
  body.push(frame(main));

  // histogram inset sharing the QBER axis
  const nBins = Math.max(5, Math.min(20, Math.floor(q.length / 4)));
  const counts = new Array<number>(nBins).fill(0);
  const binH = yDom[1] / nBins;
  for (const v of q) counts[Math.min(nBins - 1, Math.floor(v / binH))] += 1;
  const cs = linear([0, Math.max(...counts, 1)], [inset.x0, inset.x1 - 4]);
  for (let b = 0; b < nBins; b++) {
    const yTop = ys.map((b + 1) * binH);
    const yBot = ys.map(b * binH);
    if (counts[b] > 0) {
      body.push(
        rect(inset.x0, yTop, cs.map(counts[b]) - inset.x0, yBot - yTop, {
          fill: PALETTE[0],
          "fill-opacity": 0.65,
          stroke: "#ffffff",
          "stroke-width": 0.5,
        })
      );
    }
  }
  body.push(frame(inset));
  body.push(text((inset.x0 + inset.x1) / 2, H - 34, "count", { "text-anchor": "middle", "font-size": 12 }));

  const mode = manifest.config.ao.mode;
  body.push(
    text(W / 2, 22, `QBER per realization (ao=${mode}, d=${d}, n=${records.length})`, {
      "text-anchor": "middle",
      "font-size": 13,
    })
  );
  return document(W, H, body);
}

// ---------------------------------------------------------------------------
// sweep family
// ---------------------------------------------------------------------------

const SWEEP_AXIS: Partial<Record<FigureKind, string>> = {
  "order-sweep": "N",
  "aperture-sweep": "R",
  "delay-sweep": "v",
};

function sweepGuides(kind: FigureKind, manifest: Manifest, xs: Scale, boxes: Box[]): string[] {
  const out: string[] = [];
  const vline = (x: number, label: string) => {
    if (x < xs.domain[0] || x > xs.domain[1]) return;
    const px = xs.map(x);
    for (const b of boxes) out.push(line(px, b.y0, px, b.y1, { stroke: "#555555", "stroke-dasharray": "4 3" }));
    out.push(text(px + 4, boxes[0].y0 + 12, label, { "font-size": 10, fill: "#555555" }));
  };
  if (manifest.axis === "r0") {
    vline(manifest.derived.r0_at_sigma1, "sigma_R^2 = 1");
  }
  if (kind === "delay-sweep") {
    const r0 = manifest.derived.r0;
    const tauAO = manifest.derived.tau_AO;
    if (r0 > 0 && tauAO > 0) {
      // Greenwood time matches ten loop periods at this wind speed
      vline(r0 / (0.43 * 10 * tauAO), "tau_G = 10 tau_AO");
    }
  }
  return out;
}

function renderSweep(runDir: string, kind: FigureKind): string {
  const rows: SweepRow[] = readSweep(path.join(runDir, "sweep.csv"));
  const manifest = readManifest(runDir);
  const axis = manifest.axis ?? "value";
  const want = SWEEP_AXIS[kind];
  if (want && axis !== want) {
    throw new Error(`${kind} wants a sweep over ${want}, but ${runDir} sweeps ${axis}`);
  }
  const d = manifest.config.protocol.d;
  const threshold = 100 * qberThreshold(d);

  const top: Box = { x0: 62, y0: 40, x1: W - 20, y1: 212 };
  const bot: Box = { x0: 62, y0: 240, x1: W - 20, y1: H - 50 };
  const xs = linear(padded(extent(rows.map((r) => r.axis))), [top.x0, top.x1]);

  const qv = rows.map((r) => 100 * r.mean_Q);
  const qe = rows.map((r) => 100 * r.se_Q);
  const qDom = padded([0, Math.max(...qv.map((v, i) => v + qe[i]), threshold)], 0.08);
  const qs = linear(qDom, [top.y1, top.y0]);

  const rv = rows.map((r) => r.mean_r);
  const re = rows.map((r) => r.se_r);
  const rDom = padded(
    [Math.min(0, ...rv.map((v, i) => v - re[i])), Math.max(0, ...rv.map((v, i) => v + re[i]))],
    0.08
  );
  const rs = linear(rDom, [bot.y1, bot.y0]);

  const body: string[] = [];
  body.push(...yAxis(top, qs, "QBER (%)"));
  body.push(...yAxis(bot, rs, "r_min (bits/photon)"));
  body.push(...xAxis(bot, xs, AXIS_LABELS[axis] ?? axis));

  const yThr = qs.map(threshold);
  body.push(line(top.x0, yThr, top.x1, yThr, { stroke: "#000000", "stroke-dasharray": "6 3" }));
  body.push(text(top.x1 - 6, yThr - 5, `Q = ${threshold.toFixed(1)}%`, { "font-size": 10, "text-anchor": "end" }));
  const yZero = rs.map(0);
  body.push(line(bot.x0, yZero, bot.x1, yZero, { stroke: "#000000", "stroke-dasharray": "6 3" }));

  body.push(...sweepGuides(kind, manifest, xs, [top, bot]));

  const qPts: Array<[number, number]> = rows.map((r, i) => [xs.map(r.axis), qs.map(qv[i])]);
  const rPts: Array<[number, number]> = rows.map((r, i) => [xs.map(r.axis), rs.map(rv[i])]);
  if (rows.length > 1) {
    body.push(polyline(qPts, { stroke: PALETTE[0], "stroke-width": 1.2 }));
    body.push(polyline(rPts, { stroke: PALETTE[2], "stroke-width": 1.2 }));
  }
  rows.forEach((r, i) => {
    body.push(...errorBar(qPts[i][0], qs.map(qv[i] - qe[i]), qs.map(qv[i] + qe[i]), PALETTE[0]));
    body.push(circle(qPts[i][0], qPts[i][1], 3, { fill: PALETTE[0] }));
    body.push(...errorBar(rPts[i][0], rs.map(rv[i] - re[i]), rs.map(rv[i] + re[i]), PALETTE[2]));
    body.push(circle(rPts[i][0], rPts[i][1], 3, { fill: PALETTE[2] }));
  });
  body.push(frame(top));
  body.push(frame(bot));

  const mode = manifest.config.ao.mode;
  body.push(
    text(W / 2, 22, `QBER and key rate vs ${axis} (ao=${mode}, d=${d})`, {
      "text-anchor": "middle",
      "font-size": 13,
    })
  );
  return document(W, H, body);
}

// ---------------------------------------------------------------------------
// heatmap
// ---------------------------------------------------------------------------

function renderHeatmap(runDir: string, basis: "oam" | "ang"): string {
  const file = path.join(runDir, `crosstalk_${basis}_mean.csv`);
  if (!fs.existsSync(file)) throw new Error(`${file}: not found (enable the crosstalk output format)`);
  const m = readCrosstalk(file);
  const d = m.lValues.length;

  const area: Box = { x0: 90, y0: 60, x1: 470, y1: 440 - 60 };
  const cell = Math.min((area.x1 - area.x0) / d, (area.y1 - area.y0) / d);
  const x0 = area.x0;
  const y0 = area.y0;
  const vMax = Math.max(...m.values.flat(), 1e-12);

  const body: string[] = [];
  for (let i = 0; i < d; i++) {
    for (let j = 0; j < d; j++) {
      const v = m.values[i][j];
      const t = v / vMax;
      body.push(
        rect(x0 + j * cell, y0 + i * cell, cell, cell, { fill: viridis(t), stroke: "#ffffff", "stroke-width": 0.5 })
      );
      body.push(
        text(x0 + (j + 0.5) * cell, y0 + (i + 0.5) * cell + 3.5, v.toFixed(2), {
          "text-anchor": "middle",
          "font-size": Math.min(11, cell / 4),
          fill: onViridis(t),
        })
      );
    }
  }
  for (let k = 0; k < d; k++) {
    body.push(
      text(x0 + (k + 0.5) * cell, y0 + d * cell + 16, String(m.lValues[k]), { "text-anchor": "middle" })
    );
    body.push(
      text(x0 - 8, y0 + (k + 0.5) * cell + 3.5, String(m.lValues[k]), { "text-anchor": "end" })
    );
  }
  body.push(text(x0 + (d * cell) / 2, y0 + d * cell + 34, "measured letter l", { "text-anchor": "middle", "font-size": 12 }));
  const ly = y0 + (d * cell) / 2;
  body.push(
    text(x0 - 40, ly, "input letter l", {
      "text-anchor": "middle",
      "font-size": 12,
      transform: `rotate(-90 ${(x0 - 40).toFixed(2)} ${ly.toFixed(2)})`,
    })
  );
  body.push(rect(x0, y0, d * cell, d * cell, { fill: "none", stroke: "#000000" }));

  // colorbar
  const cb: Box = { x0: 560, y0, x1: 584, y1: y0 + d * cell };
  const steps = 64;
  const hStep = (cb.y1 - cb.y0) / steps;
  for (let s = 0; s < steps; s++) {
    body.push(
      rect(cb.x0, cb.y1 - (s + 1) * hStep, cb.x1 - cb.x0, hStep + 0.5, { fill: viridis((s + 0.5) / steps) })
    );
  }
  body.push(rect(cb.x0, cb.y0, cb.x1 - cb.x0, cb.y1 - cb.y0, { fill: "none", stroke: "#000000" }));
  body.push(text(cb.x1 + 6, cb.y1 + 3.5, "0.00", { "font-size": 10 }));
  body.push(text(cb.x1 + 6, cb.y0 + 3.5, vMax.toFixed(2), { "font-size": 10 }));
  body.push(text(cb.x0 + 12, cb.y0 - 10, "p(l' | l)", { "text-anchor": "middle", "font-size": 11 }));

  body.push(
    text(W / 2, 26, `${m.basis} basis mean transition matrix`, { "text-anchor": "middle", "font-size": 13 })
  );
  return document(W, H, body);
}

// ---------------------------------------------------------------------------
// spectrum
// ---------------------------------------------------------------------------

function renderSpectrum(runDir: string): string {
  const file = path.join(runDir, "spectrum.csv");
  if (!fs.existsSync(file)) throw new Error(`${file}: not found (set output.spectrum = true)`);
  const spec = readSpectrum(file);

  const box: Box = { x0: 62, y0: 40, x1: W - 130, y1: H - 50 };
  const xs = linear(padded(extent(spec.window), 0.04), [box.x0, box.x1]);
  const ys = linear([0, Math.max(...spec.power.flat()) * 1.08], [box.y1, box.y0]);

  const body: string[] = [];
  body.push(...yAxis(box, ys, "mean captured power"));
  body.push(...xAxis(box, xs, "azimuthal index l"));
  spec.lIn.forEach((lin, row) => {
    const color = PALETTE[row % PALETTE.length];
    const pts: Array<[number, number]> = spec.window.map((l, j) => [xs.map(l), ys.map(spec.power[row][j])]);
    body.push(polyline(pts, { stroke: color, "stroke-width": 1.2 }));
    for (const [px, py] of pts) body.push(circle(px, py, 2.2, { fill: color }));
    const yLeg = box.y0 + 14 + 16 * row;
    body.push(line(box.x1 + 10, yLeg - 3.5, box.x1 + 30, yLeg - 3.5, { stroke: color, "stroke-width": 2 }));
    body.push(text(box.x1 + 34, yLeg, `l_in = ${lin}`, { "font-size": 11 }));
  });
  body.push(frame(box));
  body.push(
    text(W / 2, 22, "mean azimuthal power spectrum per input letter", { "text-anchor": "middle", "font-size": 13 })
  );
  return document(W, H, body);
}

// ---------------------------------------------------------------------------

export function render(opts: RenderOptions): string {
  const { runDir, kind } = opts;
  if (!fs.existsSync(runDir)) throw new Error(`run directory not found: ${runDir}`);
  switch (kind) {
    case "timeseries":
      return renderTimeseries(runDir);
    case "sweep":
    case "order-sweep":
    case "aperture-sweep":
    case "delay-sweep":
      return renderSweep(runDir, kind);
    case "heatmap":
      return renderHeatmap(runDir, opts.basis ?? "oam");
    case "spectrum":
      return renderSpectrum(runDir);
    default:
      throw new Error(`unknown figure kind: ${kind as string}`);
  }
}

export function renderToFile(opts: RenderOptions & { out: string }): void {
  fs.writeFileSync(opts.out, render(opts));
}
