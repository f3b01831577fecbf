#!/usr/bin/env node
/** figures: render SVG figures from a simulation run directory. */

import * as fs from "node:fs";
import { pathToFileURL } from "node:url";

import { Command } from "commander";

import { FIGURE_KINDS, FigureKind, renderToFile } from "./figures.js";

export function buildProgram(): Command {
  const program = new Command("figures");
  program
    .description("Render figures from a run directory produced by the simulator CLI")
    .requiredOption("--run <dir>", "run directory (contains run.json)")
    .requiredOption("--kind <kind>", `one of: ${FIGURE_KINDS.join(", ")}`)
    .requiredOption("--out <file>", "output SVG path")
    .option("--basis <basis>", "heatmap basis: oam or ang", "oam")
    .exitOverride()
    .configureOutput({ writeErr: (s) => process.stderr.write(s) })
    .action((opts: { run: string; kind: string; out: string; basis: string }) => {
      if (!(FIGURE_KINDS as readonly string[]).includes(opts.kind)) {
        throw new Error(`unknown figure kind "${opts.kind}" (expected ${FIGURE_KINDS.join(" | ")})`);
      }
      if (opts.basis !== "oam" && opts.basis !== "ang") {
        throw new Error(`unknown basis "${opts.basis}" (expected oam | ang)`);
      }
      renderToFile({
        runDir: opts.run,
        kind: opts.kind as FigureKind,
        basis: opts.basis,
        out: opts.out,
      });
      process.stdout.write(`wrote ${opts.out}\n`);
    });
  return program;
}

export function main(argv: string[]): number {
  try {
    buildProgram().parse(argv, { from: "user" });
    return 0;
  } catch (err) {
    const code = (err as { code?: unknown }).code;
    if (typeof code === "string" && code.startsWith("commander.")) {
      // commander already wrote its own message (or help text)
      return (err as { exitCode?: number }).exitCode ?? 1;
    }
    process.stderr.write(`figures: ${err instanceof Error ? err.message : String(err)}\n`);
    return 1;
  }
}

const invokedAs = (() => {
  try {
    return process.argv[1] ? pathToFileURL(fs.realpathSync(process.argv[1])).href : "";
  } catch {
    return "";
  }
})();
if (invokedAs === import.meta.url) {
  process.exit(main(process.argv.slice(2)));
}
