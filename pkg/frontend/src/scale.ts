/** Linear axis scales with matplotlib-style "nice" tick locations. */

export interface Scale {
  domain: [number, number];
  range: [number, number];
  map(v: number): number;
}

export function extent(values: number[]): [number, number] {
  if (values.length === 0) throw new Error("extent of no values");
  let lo = values[0];
  let hi = values[0];
  for (const v of values) {
    if (v < lo) lo = v;
    if (v > hi) hi = v;
  }
  return [lo, hi];
}

/** Widen [lo, hi] by frac on both sides (degenerate spans get a unit pad). */
export function padded(domain: [number, number], frac = 0.06): [number, number] {
  const [lo, hi] = domain;
  const span = hi - lo;
  if (span <= 0) {
    const pad = lo === 0 ? 0.5 : Math.abs(lo) * 0.5;
    return [lo - pad, hi + pad];
  }
  return [lo - frac * span, hi + frac * span];
}

export function linear(domain: [number, number], range: [number, number]): Scale {
  const [d0, d1] = domain;
  const [r0, r1] = range;
  const k = (r1 - r0) / (d1 - d0);
  return {
    domain,
    range,
    map: (v: number) => r0 + (v - d0) * k,
  };
}

/** Tick positions at 1/2/2.5/5 x 10^k steps, at most maxTicks of them. */
export function ticks(domain: [number, number], maxTicks = 7): number[] {
  const [lo, hi] = domain;
  const span = hi - lo;
  if (!(span > 0)) return [lo];
  const raw = span / Math.max(1, maxTicks - 1);
  const mag = Math.pow(10, Math.floor(Math.log10(raw)));
  let step = 10 * mag;
  for (const m of [1, 2, 2.5, 5]) {
    if (m * mag >= raw) {
      step = m * mag;
      break;
    }
  }
  const i0 = Math.ceil(lo / step - 1e-9);
  const i1 = Math.floor(hi / step + 1e-9);
  const out: number[] = [];
  for (let i = i0; i <= i1; i++) {
    out.push(i === 0 ? 0 : i * step);
  }
  return out;
}

/** Shortest decimal label that distinguishes the tick step. */
export function tickLabel(v: number, step: number): string {
  let decimals = Math.max(0, -Math.floor(Math.log10(step) + 1e-9));
  // the 2.5 x 10^k steps need one digit past the step's magnitude
  if (Math.abs(step * 10 ** decimals - Math.round(step * 10 ** decimals)) > 1e-9) decimals += 1;
  let s = v.toFixed(Math.min(12, decimals));
  if (decimals > 0) s = s.replace(/0+$/, "").replace(/\.$/, "");
  return s === "-0" ? "0" : s;
}
