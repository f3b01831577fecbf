import * as fs from "node:fs";
import * as os from "node:os";
import * as path from "node:path";

import { afterAll, describe, expect, it } from "vitest";

import { readCrosstalk, readManifest, readRecords, readSpectrum, readSweep } from "../src/csv.js";

const tmp = fs.mkdtempSync(path.join(os.tmpdir(), "figures-csv-"));
afterAll(() => fs.rmSync(tmp, { recursive: true, force: true }));

function file(name: string, body: string): string {
  const p = path.join(tmp, name);
  fs.writeFileSync(p, body);
  return p;
}

const RECORDS = "i,t,Q_oam,Q_ang,Q,r_min,captured_energy,residues\n" + "0,0,0.1,0.2,0.15,0.9,0.8,3\n" + "1,0.001,0.2,0.2,0.2,0.5,0.7,0\n";

describe("readRecords", () => {
  it("parses well-formed rows", () => {
    const rows = readRecords(file("ok.csv", RECORDS));
    expect(rows).toHaveLength(2);
    expect(rows[0].Q).toBe(0.15);
    expect(rows[1].t).toBe(0.001);
    expect(rows[1].residues).toBe(0);
  });
  it("names the row and column of a bad cell", () => {
    const bad = RECORDS.replace("0.5", "oops");
    expect(() => readRecords(file("bad.csv", bad))).toThrow(/row 3, column r_min/);
  });
  it("rejects a foreign header", () => {
    expect(() => readRecords(file("hdr.csv", "a,b\n1,2\n"))).toThrow(/header/);
  });
  it("rejects ragged rows", () => {
    expect(() => readRecords(file("ragged.csv", RECORDS + "2,0.002,0.1\n"))).toThrow(/row 4/);
  });
});

describe("readSweep", () => {
  it("parses sweep points", () => {
    const rows = readSweep(file("sweep.csv", "axis,mean_Q,se_Q,mean_r,se_r\n0.05,0.2,0.01,0.4,0.05\n"));
    expect(rows).toHaveLength(1);
    expect(rows[0].mean_r).toBe(0.4);
  });
  it("rejects an empty sweep", () => {
    expect(() => readSweep(file("empty.csv", "axis,mean_Q,se_Q,mean_r,se_r\n"))).toThrow(/no sweep points/);
  });
});

describe("readCrosstalk", () => {
  const GOOD = "# basis=OAM realization=-1 t=0\n-1,0,1\n0.8,0.1,0.1\n0.1,0.8,0.1\n0.2,0.2,0.6\n";
  it("parses the metadata line and matrix", () => {
    const m = readCrosstalk(file("ct.csv", GOOD));
    expect(m.basis).toBe("OAM");
    expect(m.realization).toBe(-1);
    expect(m.lValues).toEqual([-1, 0, 1]);
    expect(m.values[2][2]).toBe(0.6);
  });
  it("requires a square matrix", () => {
    const short = GOOD.split("\n").slice(0, 4).join("\n") + "\n";
    expect(() => readCrosstalk(file("short.csv", short))).toThrow(/2 rows for 3 letters/);
  });
  it("names the offending cell", () => {
    expect(() => readCrosstalk(file("cell.csv", GOOD.replace("0.6", "x")))).toThrow(/row 5/);
  });
  it("requires the metadata header", () => {
    expect(() => readCrosstalk(file("nohdr.csv", "-1,0,1\n1,0,0\n"))).toThrow(/basis/);
  });
});

describe("readSpectrum", () => {
  const GOOD = "# comment\nl_in,-1,0,1\n-1,0.7,0.2,0.1\n1,0.1,0.2,0.7\n";
  it("parses window and rows, skipping comments", () => {
    const s = readSpectrum(file("spec.csv", GOOD));
    expect(s.window).toEqual([-1, 0, 1]);
    expect(s.lIn).toEqual([-1, 1]);
    expect(s.power[1][2]).toBe(0.7);
  });
  it("rejects a row with the wrong width", () => {
    expect(() => readSpectrum(file("wide.csv", GOOD + "0,0.5,0.5\n"))).toThrow(/row 4/);
  });
});

describe("readManifest", () => {
  it("requires derived and config blocks", () => {
    const dir = path.join(tmp, "stub-run");
    fs.mkdirSync(dir, { recursive: true });
    fs.writeFileSync(path.join(dir, "run.json"), JSON.stringify({ seed: 1 }));
    expect(() => readManifest(dir)).toThrow(/derived\/config/);
  });
});
