/**
 * Readers for the simulator's documented output contracts: records.csv,
 * sweep.csv, crosstalk_*.csv, spectrum.csv and the run.json manifest.
 * Parse failures throw with the file, row and column named.
 */

import * as fs from "node:fs";
import * as path from "node:path";

export interface RecordRow {
  i: number;
  t: number;
  Q_oam: number;
  Q_ang: number;
  Q: number;
  r_min: number;
  captured_energy: number;
  residues: number;
}

export interface SweepRow {
  axis: number;
  mean_Q: number;
  se_Q: number;
  mean_r: number;
  se_r: number;
}

export interface CrosstalkMatrix {
  basis: string;
  realization: number;
  t: number;
  lValues: number[];
  values: number[][];
}

export interface Spectrum {
  window: number[];
  lIn: number[];
  power: number[][];
}

export interface Manifest {
  axis?: string;
  values?: number[];
  seed: number;
  version: string;
  derived: Record<string, number>;
  config: {
    protocol: { d: number; spacing: number; R: number };
    turbulence: { r0: number | null; v: number; z: number };
    ao: { mode: string; order: number; f_ao: number; delay_frames: number };
    run: { n_realizations: number; dt: number };
    [k: string]: unknown;
  };
}

function parseNumber(text: string, file: string, row: number, column: string): number {
  const v = Number(text);
  if (text.trim() === "" || !Number.isFinite(v)) {
    throw new Error(`${file}: row ${row}, column ${column}: not a number: ${JSON.stringify(text)}`);
  }
  return v;
}

function readTable(file: string, expected: string[]): number[][] {
  const lines = fs
    .readFileSync(file, "utf8")
    .split("\n")
    .filter((ln) => ln.trim() !== "");
  if (lines.length === 0) throw new Error(`${file}: empty file`);
  const header = lines[0].split(",").map((h) => h.trim());
  if (expected.join(",") !== header.join(",")) {
    throw new Error(`${file}: header is "${lines[0]}", expected "${expected.join(",")}"`);
  }
  return lines.slice(1).map((ln, idx) => {
    const cells = ln.split(",");
    if (cells.length !== expected.length) {
      throw new Error(`${file}: row ${idx + 2}: ${cells.length} cells, expected ${expected.length}`);
    }
    return cells.map((c, j) => parseNumber(c, file, idx + 2, expected[j]));
  });
}

const RECORD_COLUMNS = ["i", "t", "Q_oam", "Q_ang", "Q", "r_min", "captured_energy", "residues"];

export function readRecords(file: string): RecordRow[] {
  return readTable(file, RECORD_COLUMNS).map((cells) => ({
    i: cells[0],
    t: cells[1],
    Q_oam: cells[2],
    Q_ang: cells[3],
    Q: cells[4],
    r_min: cells[5],
    captured_energy: cells[6],
    residues: cells[7],
  }));
}

const SWEEP_COLUMNS = ["axis", "mean_Q", "se_Q", "mean_r", "se_r"];

export function readSweep(file: string): SweepRow[] {
  const rows = readTable(file, SWEEP_COLUMNS).map((cells) => ({
    axis: cells[0],
    mean_Q: cells[1],
    se_Q: cells[2],
    mean_r: cells[3],
    se_r: cells[4],
  }));
  if (rows.length === 0) throw new Error(`${file}: no sweep points`);
  return rows;
}

export function readCrosstalk(file: string): CrosstalkMatrix {
  const lines = fs
    .readFileSync(file, "utf8")
    .split("\n")
    .filter((ln) => ln.trim() !== "");
  if (lines.length < 3 || !lines[0].startsWith("#")) {
    throw new Error(`${file}: expected "# basis=... realization=... t=..." then letters and rows`);
  }
  const meta = new Map<string, string>();
  for (const kv of lines[0].replace(/^#\s*/, "").split(/\s+/)) {
    const [k, v] = kv.split("=");
    if (k && v !== undefined) meta.set(k, v);
  }
  const basis = meta.get("basis");
  if (!basis) throw new Error(`${file}: header is missing basis=`);
  const lValues = lines[1].split(",").map((c, j) => parseNumber(c, file, 2, `l[${j}]`));
  const values = lines.slice(2).map((ln, idx) => {
    const cells = ln.split(",");
    if (cells.length !== lValues.length) {
      throw new Error(`${file}: row ${idx + 3}: ${cells.length} cells, expected ${lValues.length}`);
    }
    return cells.map((c, j) => parseNumber(c, file, idx + 3, `p[${j}]`));
  });
  if (values.length !== lValues.length) {
    throw new Error(`${file}: ${values.length} rows for ${lValues.length} letters`);
  }
  return {
    basis,
    realization: Number(meta.get("realization") ?? -1),
    t: Number(meta.get("t") ?? 0),
    lValues,
    values,
  };
}

export function readSpectrum(file: string): Spectrum {
  const lines = fs
    .readFileSync(file, "utf8")
    .split("\n")
    .filter((ln) => ln.trim() !== "" && !ln.startsWith("#"));
  if (lines.length < 2 || !lines[0].startsWith("l_in,")) {
    throw new Error(`${file}: expected an "l_in,<window...>" header and one row per letter`);
  }
  const window = lines[0]
    .split(",")
    .slice(1)
    .map((c, j) => parseNumber(c, file, 1, `window[${j}]`));
  const lIn: number[] = [];
  const power = lines.slice(1).map((ln, idx) => {
    const cells = ln.split(",");
    if (cells.length !== window.length + 1) {
      throw new Error(`${file}: row ${idx + 2}: ${cells.length} cells, expected ${window.length + 1}`);
    }
    lIn.push(parseNumber(cells[0], file, idx + 2, "l_in"));
    return cells.slice(1).map((c, j) => parseNumber(c, file, idx + 2, `p[${j}]`));
  });
  return { window, lIn, power };
}

export function readManifest(runDir: string): Manifest {
  const file = path.join(runDir, "run.json");
  const manifest = JSON.parse(fs.readFileSync(file, "utf8")) as Manifest;
  if (!manifest.derived || !manifest.config) {
    throw new Error(`${file}: missing derived/config blocks`);
  }
  return manifest;
}
