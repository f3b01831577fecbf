import * as fs from "node:fs";
import * as os from "node:os";
import * as path from "node:path";

import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { readManifest, readSweep } from "../src/csv.js";
import { FIGURE_KINDS, FigureKind, render, renderToFile } from "../src/figures.js";
import { extent, linear, padded } from "../src/scale.js";
import { simulate } from "./fixtures.js";

const root = fs.mkdtempSync(path.join(os.tmpdir(), "figures-run-"));
afterAll(() => fs.rmSync(root, { recursive: true, force: true }));

let baseRun: string;
let r0Sweep: string;
let orderSweep: string;
let apertureSweep: string;
let delaySweep: string;
let onePoint: string;

beforeAll(() => {
  baseRun = simulate(root, "base", { n: 4, spectrum: true });
  // 64^2 pitch resolves layer r0 down to ~0.02 m; sigma_R^2 = 1 sits at 0.019 m,
  // just inside the padded axis of this range
  r0Sweep = simulate(root, "r0sweep", {}, "r0=0.02,0.03,0.05");
  orderSweep = simulate(root, "ordersweep", {}, "N=5,11");
  apertureSweep = simulate(root, "aperture", {}, "R=0.1,0.15");
  delaySweep = simulate(root, "delay", {}, "v=1,5");
  onePoint = simulate(root, "onepoint", {}, "R=0.15");
}, 900_000);

function dirFor(kind: FigureKind): string {
  switch (kind) {
    case "sweep":
      return r0Sweep;
    case "order-sweep":
      return orderSweep;
    case "aperture-sweep":
      return apertureSweep;
    case "delay-sweep":
      return delaySweep;
    default:
      return baseRun;
  }
}

describe("render", () => {
  it("produces an SVG document for every figure kind", () => {
    for (const kind of FIGURE_KINDS) {
      const svg = render({ runDir: dirFor(kind), kind });
      expect(svg.startsWith("<?xml"), kind).toBe(true);
      expect(svg, kind).toContain("</svg>");
      expect(svg.length, kind).toBeGreaterThan(2000);
    }
  });

  it("re-renders byte-identically", () => {
    for (const kind of FIGURE_KINDS) {
      const a = path.join(root, `${kind}-a.svg`);
      const b = path.join(root, `${kind}-b.svg`);
      renderToFile({ runDir: dirFor(kind), kind, out: a });
      renderToFile({ runDir: dirFor(kind), kind, out: b });
      expect(fs.readFileSync(a).equals(fs.readFileSync(b)), kind).toBe(true);
    }
  });

  it("rejects a kind/axis mismatch", () => {
    expect(() => render({ runDir: r0Sweep, kind: "order-sweep" })).toThrow(/wants a sweep over N.*sweeps r0/);
    expect(() => render({ runDir: delaySweep, kind: "aperture-sweep" })).toThrow(/sweeps v/);
  });

  it("rejects a missing run directory and missing optional outputs", () => {
    expect(() => render({ runDir: path.join(root, "nope"), kind: "timeseries" })).toThrow(/not found/);
    expect(() => render({ runDir: r0Sweep, kind: "spectrum" })).toThrow(/spectrum.csv/);
  });
});

describe("timeseries", () => {
  it("draws the mean and the key-rate threshold", () => {
    const svg = render({ runDir: baseRun, kind: "timeseries" });
    expect(svg).toContain("mean ");
    expect(svg).toContain("r_min = 0 at Q = ");
    // one marker per realization
    expect((svg.match(/<circle/g) ?? []).length).toBe(4);
  });
});

describe("sweep", () => {
  it("places the sigma_R^2 = 1 line at the manifest r0", () => {
    const manifest = readManifest(r0Sweep);
    const rows = readSweep(path.join(r0Sweep, "sweep.csv"));
    // same layout as the renderer: panel x spans 62..660
    const xs = linear(padded(extent(rows.map((r) => r.axis))), [62, 660]);
    const px = xs.map(manifest.derived.r0_at_sigma1).toFixed(2);
    const svg = render({ runDir: r0Sweep, kind: "sweep" });
    expect(svg).toContain("sigma_R^2 = 1");
    expect(svg).toContain(`<line x1="${px}" y1="40.00" x2="${px}"`);
  });

  it("draws the loop-time guide on the wind sweep", () => {
    const svg = render({ runDir: delaySweep, kind: "delay-sweep" });
    expect(svg).toContain("tau_G = 10 tau_AO");
  });

  it("renders a single point as a marker with an error bar", () => {
    const svg = render({ runDir: onePoint, kind: "sweep" });
    expect(svg).toContain("<circle");
    expect(svg).not.toContain("<polyline");
    // error bar: vertical stem plus two caps, for Q and for r_min
    const bars = (svg.match(/<line[^>]*stroke="#1f77b4"/g) ?? []).length;
    expect(bars).toBeGreaterThanOrEqual(3);
  });
});

describe("heatmap", () => {
  it("renders both bases from a run", () => {
    for (const basis of ["oam", "ang"] as const) {
      const svg = render({ runDir: baseRun, kind: "heatmap", basis });
      expect(svg).toContain(`${basis.toUpperCase()} basis mean transition matrix`);
    }
  });

  it("shows an identity matrix as a pure diagonal", () => {
    const dir = path.join(root, "identity");
    fs.mkdirSync(dir, { recursive: true });
    fs.writeFileSync(
      path.join(dir, "crosstalk_oam_mean.csv"),
      "# basis=OAM realization=-1 t=0\n-1,0,1\n1,0,0\n0,1,0\n0,0,1\n"
    );
    const svg = render({ runDir: dir, kind: "heatmap" });
    // cells carry a white border; the colorbar does not, so count cells only
    const diag = (svg.match(/fill="#fde725" stroke="#ffffff"/g) ?? []).length;
    const off = (svg.match(/fill="#440154" stroke="#ffffff"/g) ?? []).length;
    expect(diag).toBe(3);
    expect(off).toBe(6);
    expect(svg).toContain(">1.00<");
  });
});

describe("spectrum", () => {
  it("draws one curve and legend entry per input letter", () => {
    const svg = render({ runDir: baseRun, kind: "spectrum" });
    expect((svg.match(/<polyline/g) ?? []).length).toBe(3);
    expect(svg).toContain("l_in = -1");
    expect(svg).toContain("l_in = 1");
  });
});
