import { describe, expect, it } from 'vitest';

import type { FrameMsg } from '../src/protocol.js';
import { render } from '../src/render.js';
import { initialState, update } from '../src/state.js';

const NOW = 5000;

function withFrame(frame: FrameMsg) {
  return update(initialState(), { kind: 'server', msg: frame, now: NOW }).state;
}

function demoFrame(): FrameMsg {
  return {
    type: 'frame',
    seq: 3,
    tick: 2,
    t: 0.3,
    agents: [
      { id: 'up', state: [0.2, 0.3], alive: true, metric: 0.1, phi_digest: 'aa', path: [[0.2, 0.3], [0.25, 0.35]] },
      { id: 'down', state: [0.7, 0.7], alive: false, metric: 0.3, phi_digest: 'aa', path: [] },
    ],
    fused_metric: 0.12,
    discoveries: [{ tick: 1, kind: 'DD', location: [0.5, 0.5], by: 'up' }],
    user_command: [[0.9, 0.1]],
    phi_grid: [
      [0.1, 0.2],
      [0.3, 0.4],
    ],
  };
}

describe('render', () => {
  it('is pure: identical inputs give identical draw lists', () => {
    const state = withFrame(demoFrame());
    expect(render(state, NOW)).toEqual(render(state, NOW));
  });

  it('shows an empty-state banner before any frame', () => {
    let state = initialState();
    state = update(state, {
      kind: 'server',
      msg: { type: 'hello', schema: 1, scenario: { name: 'demo', agents: [] } },
      now: NOW,
    }).state;
    const ops = render(state, NOW);
    expect(ops).toHaveLength(1);
    expect(ops[0]).toMatchObject({ op: 'banner' });
    expect((ops[0] as { text: string }).text).toContain('demo');
  });

  it('distinguishes disabled agents with a different glyph', () => {
    const ops = render(withFrame(demoFrame()), NOW);
    const discs = ops.filter((o) => o.op === 'disc');
    const crosses = ops.filter((o) => o.op === 'cross');
    expect(discs).toHaveLength(1); // the live agent
    // one cross for the dead agent, one for the hazard marker
    expect(crosses).toHaveLength(2);
    const dead = crosses.find((c) => (c as { x: number }).x === 0.7);
    expect(dead).toBeDefined();
  });

  it('selects the requested overlay heatmap', () => {
    let state = withFrame(demoFrame());
    expect(render(state, NOW).some((o) => o.op === 'heatmap')).toBe(true);
    state = update(state, { kind: 'set-overlay', overlay: 'none' }).state;
    expect(render(state, NOW).some((o) => o.op === 'heatmap')).toBe(false);
  });

  it('marks a stale stream with the reconnecting banner', () => {
    const state = withFrame(demoFrame());
    const fresh = render(state, NOW + 100);
    const stale = render(state, NOW + 5000);
    expect(fresh.some((o) => o.op === 'banner')).toBe(false);
    expect(stale.some((o) => o.op === 'banner' && (o as { text: string }).text === 'reconnecting')).toBe(true);
  });

  it('renders the paint buffer as shaded cells', () => {
    let state = withFrame(demoFrame());
    state = update(state, { kind: 'arm-toggle' }).state;
    state = update(state, { kind: 'paint', x: 0.5, y: 0.5 }).state;
    const cells = render(state, NOW).find((o) => o.op === 'cells');
    expect(cells).toBeDefined();
  });
});
