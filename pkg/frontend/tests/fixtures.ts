/** Tiny simulator runs for figure tests, produced through the public CLI. */

import { execFileSync } from "node:child_process";
import * as fs from "node:fs";
import * as path from "node:path";

const SIM = process.env.OAMQKD_BIN ?? "oamqkd";

export interface FixtureOptions {
  n?: number;
  seed?: number;
  spectrum?: boolean;
}

function iniText(outDir: string, opts: FixtureOptions): string {
  return [
    "[turbulence]",
    "r0 = 0.05",
    "n_layers = 2",
    "",
    "[protocol]",
    "d = 3",
    "p_max = 2",
    "",
    "[ao]",
    "mode = none",
    "",
    "[optics]",
    "grid_n = 64",
    "",
    "[run]",
    `n_realizations = ${opts.n ?? 2}`,
    `master_seed = ${opts.seed ?? 11}`,
    "",
    "[output]",
    `directory = ${outDir}`,
    `spectrum = ${opts.spectrum ? "yes" : "no"}`,
    "",
  ].join("\n");
}

/** Run `oamqkd simulate` (optionally a sweep) and return the run directory. */
export function simulate(root: string, name: string, opts: FixtureOptions = {}, sweep?: string): string {
  const outDir = path.join(root, name);
  const ini = path.join(root, `${name}.ini`);
  fs.writeFileSync(ini, iniText(outDir, opts));
  const args = ["simulate", "--config", ini];
  if (sweep) args.push("--sweep", sweep);
  execFileSync(SIM, args, { stdio: "pipe" });
  return outDir;
}
