import { describe, expect, it } from 'vitest';

import { cellOf, cellsToPoints, keyOf, PAINT_GRID, stampBrush } from '../src/paint.js';

describe('paint buffer', () => {
  it('maps unit coordinates to grid cells', () => {
    expect(cellOf(0, 0)).toEqual([0, 0]);
    expect(cellOf(0.999999, 0.999999)).toEqual([PAINT_GRID - 1, PAINT_GRID - 1]);
    expect(cellOf(1.0, 1.0)).toEqual([PAINT_GRID - 1, PAINT_GRID - 1]); // clamped
  });

  it('converts cells to their center points in sorted order', () => {
    const pts = cellsToPoints([keyOf([0, 0]), keyOf([49, 49]), keyOf([10, 5])]);
    expect(pts[0]).toEqual([0.01, 0.01]);
    expect(pts[2]).toEqual([0.99, 0.99]);
    for (const [x, y] of pts) {
      expect(x).toBeGreaterThan(0);
      expect(x).toBeLessThan(1);
      expect(y).toBeGreaterThan(0);
      expect(y).toBeLessThan(1);
    }
  });

  it('stamping is idempotent over the same spot', () => {
    const once = stampBrush(new Set(), 0.5, 0.5);
    const twice = stampBrush(once, 0.5, 0.5);
    expect(twice.size).toBe(once.size);
    expect(once.size).toBeGreaterThanOrEqual(4);
  });

  it('never stamps outside the grid', () => {
    const cells = stampBrush(new Set(), 0.001, 0.999, 0.1);
    for (const key of cells) {
      const [i, j] = key.split(',').map(Number);
      expect(i).toBeGreaterThanOrEqual(0);
      expect(j).toBeLessThan(PAINT_GRID);
    }
  });
});
