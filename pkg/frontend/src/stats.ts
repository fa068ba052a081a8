/**
 * Statistics mirroring the harness summarize exactly: left-fold mean,
 * population standard deviation, nearest-rank percentiles. Operation order
 * matters because the acceptance check compares values for strict equality
 * against the Python side (both are IEEE-754 doubles).
 */

export function mean(values: number[]): number {
  let total = 0.0;
  for (const v of values) total += v;
  return total / values.length;
}

export function std(values: number[]): number {
  const m = mean(values);
  let acc = 0.0;
  for (const v of values) acc += (v - m) * (v - m);
  return Math.sqrt(acc / values.length);
}

/** Nearest-rank percentile over the fully sorted sample. */
export function percentile(values: number[], q: number): number {
  if (values.length === 0) throw new Error('percentile of empty sample');
  if (!(q > 0 && q <= 100)) throw new Error('q must be in (0, 100]');
  const ordered = [...values].sort((a, b) => a - b);
  const idx = Math.max(0, Math.ceil((q / 100.0) * ordered.length) - 1);
  return ordered[idx];
}

export interface LatencyStats {
  count: number;
  mean: number;
  std: number;
  p50: number;
  p99: number;
}

export interface DurationStats {
  count: number;
  mean: number;
  p99: number;
}

export function latencyStats(values: number[]): LatencyStats | null {
  if (values.length === 0) return null;
  return {
    count: values.length,
    mean: mean(values),
    std: std(values),
    p50: percentile(values, 50),
    p99: percentile(values, 99),
  };
}

export function durationStats(values: number[]): DurationStats | null {
  if (values.length === 0) return null;
  return { count: values.length, mean: mean(values), p99: percentile(values, 99) };
}

/** Empirical CDF points: (value, cumulative fraction), one step per sample. */
export function ecdf(values: number[]): Array<[number, number]> {
  const ordered = [...values].sort((a, b) => a - b);
  return ordered.map((v, i) => [v, (i + 1) / ordered.length]);
}
