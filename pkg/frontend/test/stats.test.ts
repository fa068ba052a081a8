import { describe, expect, it } from 'vitest';

import { ecdf, mean, percentile, std } from '../src/stats.js';

describe('percentile (nearest rank)', () => {
  it('p50 of a skewed sample picks the low value', () => {
    expect(percentile([1, 1, 1, 100], 50)).toBe(1);
  });

  it('matches a hand computation on 1..100', () => {
    const values = Array.from({ length: 100 }, (_, i) => i + 1);
    expect(percentile(values, 50)).toBe(50);
    expect(percentile(values, 99)).toBe(99);
    expect(percentile(values, 100)).toBe(100);
    expect(percentile(values, 1)).toBe(1);
  });

  it('rejects empty samples', () => {
    expect(() => percentile([], 50)).toThrow();
  });
});

describe('mean and std', () => {
  it('population std over a known sample', () => {
    const values = [2, 4, 4, 4, 5, 5, 7, 9];
    expect(mean(values)).toBe(5);
    expect(std(values)).toBe(2);
  });
});

describe('ecdf', () => {
  it('single sample is one step at that latency', () => {
    expect(ecdf([0.42])).toEqual([[0.42, 1.0]]);
  });

  it('passes through (50, 0.5) for 1..100', () => {
    const points = ecdf(Array.from({ length: 100 }, (_, i) => i + 1));
    const at50 = points.find(([v]) => v === 50);
    expect(at50).toBeDefined();
    expect(at50![1]).toBeCloseTo(0.5, 12);
  });

  it('is sorted and ends at 1', () => {
    const points = ecdf([3, 1, 2]);
    expect(points.map(([v]) => v)).toEqual([1, 2, 3]);
    expect(points[points.length - 1][1]).toBe(1);
  });
});
