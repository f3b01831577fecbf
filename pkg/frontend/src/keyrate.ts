/** Secret-key bound r_min(q, d) and its QBER zero crossing, for annotations. */

export function secretKeyRate(q: number, d: number): number {
  if (q < 0 || q >= 1) throw new Error(`QBER out of [0, 1): ${q}`);
  if (d < 2) throw new Error(`dimension must be >= 2: ${d}`);
  let h = 0;
  if (q > 0) h += q * Math.log2(q / (d - 1));
  if (q < 1) h += (1 - q) * Math.log2(1 - q);
  return Math.log2(d) + 2 * h;
}

/** QBER at which r_min crosses zero (0.11 for d=2, 0.21 for d=5). */
export function qberThreshold(d: number): number {
  let lo = 1e-9;
  let hi = 0.9;
  for (let k = 0; k < 200; k++) {
    const mid = 0.5 * (lo + hi);
    if (secretKeyRate(mid, d) > 0) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}
