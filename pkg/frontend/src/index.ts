export { render, renderToFile, FIGURE_KINDS } from "./figures.js";
export type { FigureKind, RenderOptions } from "./figures.js";
export { readRecords, readSweep, readCrosstalk, readSpectrum, readManifest } from "./csv.js";
export type { RecordRow, SweepRow, CrosstalkMatrix, Spectrum, Manifest } from "./csv.js";
export { secretKeyRate, qberThreshold } from "./keyrate.js";
