// Paint buffer: the set of workspace cells currently shaded by the brush.
// Cells live on a fixed grid so repeated strokes over the same spot stay
// one command point.

export const PAINT_GRID = 50;

export type CellKey = string; // "i,j"

export function cellOf(x: number, y: number): [number, number] {
  const clamp = (v: number) => Math.min(Math.max(v, 0), 1 - 1e-9);
  return [Math.floor(clamp(x) * PAINT_GRID), Math.floor(clamp(y) * PAINT_GRID)];
}

export function keyOf(cell: [number, number]): CellKey {
  return `${cell[0]},${cell[1]}`;
}

export function parseKey(key: CellKey): [number, number] {
  const [i, j] = key.split(',').map(Number);
  return [i, j];
}

/** Painted cells as unit-coordinate command points (cell centers). */
export function cellsToPoints(cells: Iterable<CellKey>): [number, number][] {
  const pts: [number, number][] = [];
  for (const key of cells) {
    const [i, j] = parseKey(key);
    pts.push([(i + 0.5) / PAINT_GRID, (j + 0.5) / PAINT_GRID]);
  }
  pts.sort((a, b) => a[0] - b[0] || a[1] - b[1]);
  return pts;
}

/** Stamp a round brush of the given radius (unit coords) onto the buffer. */
export function stampBrush(
  cells: Set<CellKey>,
  x: number,
  y: number,
  radius: number = 1.2 / PAINT_GRID,
): Set<CellKey> {
  const out = new Set(cells);
  const r = Math.max(1, Math.ceil(radius * PAINT_GRID));
  const [ci, cj] = cellOf(x, y);
  for (let i = ci - r; i <= ci + r; i++) {
    for (let j = cj - r; j <= cj + r; j++) {
      if (i < 0 || j < 0 || i >= PAINT_GRID || j >= PAINT_GRID) continue;
      const cx = (i + 0.5) / PAINT_GRID;
      const cy = (j + 0.5) / PAINT_GRID;
      if (Math.hypot(cx - x, cy - y) <= radius) out.add(keyOf([i, j]));
    }
  }
  return out;
}
