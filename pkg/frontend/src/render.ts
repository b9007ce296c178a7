// Pure rendering: (state, clock) -> list of draw primitives.
//
// The draw list is deterministic for identical inputs, which is what the
// snapshot tests pin down; drawToCanvas is the only code that touches a
// real 2D context. All geometry is in unit workspace coordinates with the
// origin at the lower left; the canvas adapter flips the y axis.

import type { ConsoleState } from './state.js';
import { isStale } from './state.js';
import { parseKey, PAINT_GRID } from './paint.js';

export type DrawOp =
  | { op: 'heatmap'; grid: number[][]; alpha: number }
  | { op: 'cells'; cells: [number, number][]; grid: number; color: string }
  | { op: 'disc'; x: number; y: number; r: number; color: string }
  | { op: 'cross'; x: number; y: number; r: number; color: string }
  | { op: 'ring'; x: number; y: number; r: number; color: string }
  | { op: 'polyline'; points: [number, number][]; color: string; width: number }
  | { op: 'banner'; text: string }
  | { op: 'status'; text: string };

const AGENT_COLORS = ['#2563eb', '#0f766e', '#ca8a04', '#9333ea', '#ea580c', '#be123c'];

export function agentColor(index: number): string {
  return AGENT_COLORS[index % AGENT_COLORS.length];
}

export function render(state: ConsoleState, now: number): DrawOp[] {
  const ops: DrawOp[] = [];

  if (state.frame === null) {
    const name = state.hello?.scenario?.name ?? 'simulator';
    const roster = state.hello?.scenario?.agents?.length ?? 0;
    ops.push({
      op: 'banner',
      text:
        state.connection === 'closed'
          ? 'connection closed'
          : `waiting for frames from ${name} (${roster} agents)`,
    });
    return ops;
  }

  const frame = state.frame;

  if (state.overlay === 'phi' && frame.phi_grid) {
    ops.push({ op: 'heatmap', grid: frame.phi_grid, alpha: 0.85 });
  } else if (state.overlay === 'reconstruction' && frame.recon_grid) {
    ops.push({ op: 'heatmap', grid: frame.recon_grid, alpha: 0.85 });
  }

  if (state.paint.size > 0) {
    ops.push({
      op: 'cells',
      cells: [...state.paint].sort().map(parseKey),
      grid: PAINT_GRID,
      color: 'rgba(37, 99, 235, 0.45)',
    });
  }

  if (frame.user_command) {
    for (const [x, y] of frame.user_command) {
      ops.push({ op: 'ring', x, y, r: 0.012, color: '#16a34a' });
    }
  }

  if (state.showDiscoveries) {
    for (const d of frame.discoveries) {
      ops.push({
        op: 'cross',
        x: d.location[0],
        y: d.location[1],
        r: 0.02,
        color: d.kind === 'DD' ? '#dc2626' : '#111111',
      });
    }
  }

  if (state.showTrails) {
    frame.agents.forEach((agent, i) => {
      const trail = state.trails.get(agent.id);
      if (trail && trail.length > 1) {
        ops.push({
          op: 'polyline',
          points: trail.map((p) => [p.x, p.y]),
          color: agentColor(i),
          width: 1,
        });
      }
    });
  }

  frame.agents.forEach((agent, i) => {
    const [x, y] = agent.state;
    if (agent.alive) {
      ops.push({ op: 'disc', x, y, r: 0.012, color: agentColor(i) });
      if (agent.path.length > 1) {
        ops.push({
          op: 'polyline',
          points: agent.path.map((p) => [p[0], p[1]]),
          color: agentColor(i),
          width: 0.5,
        });
      }
    } else {
      // disabled agents get a distinct glyph, not just a color change
      ops.push({ op: 'cross', x, y, r: 0.015, color: '#6b7280' });
    }
  });

  if (isStale(state, now)) {
    ops.push({ op: 'banner', text: 'reconnecting' });
  }

  ops.push({
    op: 'status',
    text:
      `t=${frame.t.toFixed(1)}s  coverage error ${frame.fused_metric.toExponential(2)}  ` +
      `${frame.agents.filter((a) => a.alive).length}/${frame.agents.length} alive` +
      (state.armed ? '  [brush armed]' : ''),
  });
  return ops;
}

export function drawToCanvas(ctx: CanvasRenderingContext2D, ops: DrawOp[], size: number): void {
  ctx.clearRect(0, 0, size, size);
  ctx.fillStyle = '#f8fafc';
  ctx.fillRect(0, 0, size, size);
  const X = (x: number) => x * size;
  const Y = (y: number) => (1 - y) * size;

  for (const op of ops) {
    switch (op.op) {
      case 'heatmap': {
        const n = op.grid.length;
        let max = 0;
        for (const row of op.grid) for (const v of row) max = Math.max(max, v);
        if (max <= 0) break;
        const cell = size / n;
        for (let i = 0; i < n; i++) {
          for (let j = 0; j < op.grid[i].length; j++) {
            const v = Math.max(op.grid[i][j], 0) / max;
            ctx.fillStyle = heatColor(v, op.alpha);
            ctx.fillRect(i * cell, size - (j + 1) * cell, cell + 0.5, cell + 0.5);
          }
        }
        break;
      }
      case 'cells': {
        const cell = size / op.grid;
        ctx.fillStyle = op.color;
        for (const [i, j] of op.cells) {
          ctx.fillRect(i * cell, size - (j + 1) * cell, cell, cell);
        }
        break;
      }
      case 'disc':
        ctx.fillStyle = op.color;
        ctx.beginPath();
        ctx.arc(X(op.x), Y(op.y), op.r * size, 0, 2 * Math.PI);
        ctx.fill();
        break;
      case 'ring':
        ctx.strokeStyle = op.color;
        ctx.lineWidth = 2;
        ctx.beginPath();
        ctx.arc(X(op.x), Y(op.y), op.r * size, 0, 2 * Math.PI);
        ctx.stroke();
        break;
      case 'cross': {
        const r = op.r * size;
        ctx.strokeStyle = op.color;
        ctx.lineWidth = 2.5;
        ctx.beginPath();
        ctx.moveTo(X(op.x) - r, Y(op.y) - r);
        ctx.lineTo(X(op.x) + r, Y(op.y) + r);
        ctx.moveTo(X(op.x) - r, Y(op.y) + r);
        ctx.lineTo(X(op.x) + r, Y(op.y) - r);
        ctx.stroke();
        break;
      }
      case 'polyline':
        ctx.strokeStyle = op.color;
        ctx.lineWidth = op.width;
        ctx.beginPath();
        op.points.forEach(([x, y], idx) => {
          if (idx === 0) ctx.moveTo(X(x), Y(y));
          else ctx.lineTo(X(x), Y(y));
        });
        ctx.stroke();
        break;
      case 'banner':
        ctx.fillStyle = 'rgba(15, 23, 42, 0.75)';
        ctx.fillRect(0, size / 2 - 24, size, 48);
        ctx.fillStyle = '#ffffff';
        ctx.font = '16px system-ui, sans-serif';
        ctx.textAlign = 'center';
        ctx.fillText(op.text, size / 2, size / 2 + 5);
        ctx.textAlign = 'left';
        break;
      case 'status':
        ctx.fillStyle = '#0f172a';
        ctx.font = '12px ui-monospace, monospace';
        ctx.fillText(op.text, 8, size - 8);
        break;
    }
  }
}

function heatColor(v: number, alpha: number): string {
  // white -> amber -> deep red
  const r = Math.round(255 - 35 * v);
  const g = Math.round(250 - 180 * v);
  const b = Math.round(245 - 215 * v);
  return `rgba(${r}, ${g}, ${b}, ${alpha})`;
}
