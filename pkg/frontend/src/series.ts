/** Series extraction and smoothing for the figure renderer. */

import { RunRecord, SchemaError } from "./csv.js";

export type Mode = "rewards" | "weights";

/** Centered simple moving average with edge truncation; matches the
 * simulator's own smoothing so figures agree with reported numbers. */
export function movingAverage(series: number[], window: number): number[] {
  if (window < 1) {
    throw new RangeError("window must be >= 1");
  }
  const n = series.length;
  const halfLo = Math.floor((window - 1) / 2);
  const halfHi = Math.floor(window / 2);
  const csum = new Array<number>(n + 1);
  csum[0] = 0;
  for (let i = 0; i < n; i++) csum[i + 1] = csum[i] + series[i];
  const out = new Array<number>(n);
  for (let i = 0; i < n; i++) {
    const lo = Math.max(0, i - halfLo);
    const hi = Math.min(n, i + halfHi + 1);
    out[i] = (csum[hi] - csum[lo]) / (hi - lo);
  }
  return out;
}

export function players(records: RunRecord[]): string[] {
  return [...new Set(records.map((r) => r.player))].sort();
}

/** One value series per seed for `player`, seeds in ascending order and
 * values in step order. */
export function seedSeries(
  records: RunRecord[],
  player: string,
  mode: Mode,
): Map<number, number[]> {
  const bySeed = new Map<number, { step: number; value: number }[]>();
  for (const r of records) {
    if (r.player !== player) continue;
    let value: number;
    if (mode === "weights") {
      if (r.weights.length === 0) {
        throw new SchemaError(
          'missing required column "w_model_0" for weights mode',
        );
      }
      value = r.weights[0];
    } else {
      value = r.reward;
    }
    let list = bySeed.get(r.seed);
    if (!list) {
      list = [];
      bySeed.set(r.seed, list);
    }
    list.push({ step: r.step, value });
  }
  const out = new Map<number, number[]>();
  for (const seed of [...bySeed.keys()].sort((a, b) => a - b)) {
    const list = bySeed.get(seed)!;
    list.sort((a, b) => a.step - b.step);
    out.set(
      seed,
      list.map((p) => p.value),
    );
  }
  return out;
}

/** Pointwise mean across seeds (series must share a common length). */
export function meanSeries(series: number[][]): number[] {
  if (series.length === 0) return [];
  const n = series[0].length;
  for (const s of series) {
    if (s.length !== n) {
      throw new SchemaError("seeds cover different numbers of steps");
    }
  }
  const out = new Array<number>(n).fill(0);
  for (const s of series) {
    for (let i = 0; i < n; i++) out[i] += s[i];
  }
  return out.map((v) => v / series.length);
}
