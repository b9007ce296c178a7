// Console state machine.
//
// One pure reducer owns every state change: socket events, server messages,
// and pointer gestures all flow through update(), which returns the next
// state plus a list of effects (messages to send, toasts to show). The DOM
// layer only applies effects and forwards events, so the whole interaction
// loop is testable without a browser.
//
// Gesture flow (pointer-friendly version of the tactile-tablet protocol):
// click/tap arms the brush, dragging shades cells, a double click/tap sends
// the shaded region as one command. The paint buffer survives until the
// server acks the command; a rejection keeps it intact so the user can fix
// and resubmit.

import type { FrameMsg, HelloMsg, ServerMessage } from './protocol.js';
import { encodeCommand } from './protocol.js';
import { CellKey, cellsToPoints, stampBrush } from './paint.js';

export type Overlay = 'phi' | 'reconstruction' | 'none';

export interface TrailPoint {
  t: number;
  x: number;
  y: number;
}

export const TRAIL_SECONDS = 30;
export const STALE_MS = 2000;

export interface ConsoleState {
  connection: 'connecting' | 'connected' | 'closed';
  hello: HelloMsg | null;
  frame: FrameMsg | null;
  frameAtMs: number | null;
  trails: Map<string, TrailPoint[]>;
  armed: boolean;
  paint: Set<CellKey>;
  pending: Map<string, [number, number][]>;
  nonceCounter: number;
  overlay: Overlay;
  showTrails: boolean;
  showDiscoveries: boolean;
  toasts: string[];
}

export type UiEvent =
  | { kind: 'socket-open' }
  | { kind: 'socket-closed' }
  | { kind: 'server'; msg: ServerMessage; now: number }
  | { kind: 'arm-toggle' }
  | { kind: 'paint'; x: number; y: number }
  | { kind: 'clear-paint' }
  | { kind: 'submit' }
  | { kind: 'submit-raw'; points: [number, number][] }
  | { kind: 'set-overlay'; overlay: Overlay }
  | { kind: 'toggle-trails' }
  | { kind: 'toggle-discoveries' };

export type Effect = { kind: 'send'; data: string } | { kind: 'toast'; text: string };

export function initialState(): ConsoleState {
  return {
    connection: 'connecting',
    hello: null,
    frame: null,
    frameAtMs: null,
    trails: new Map(),
    armed: false,
    paint: new Set(),
    pending: new Map(),
    nonceCounter: 0,
    overlay: 'phi',
    showTrails: true,
    showDiscoveries: true,
    toasts: [],
  };
}

export function update(
  state: ConsoleState,
  event: UiEvent,
): { state: ConsoleState; effects: Effect[] } {
  switch (event.kind) {
    case 'socket-open':
      return { state: { ...state, connection: 'connected' }, effects: [] };

    case 'socket-closed':
      return { state: { ...state, connection: 'closed' }, effects: [] };

    case 'server':
      return onServer(state, event.msg, event.now);

    case 'arm-toggle':
      return { state: { ...state, armed: !state.armed }, effects: [] };

    case 'paint': {
      if (!state.armed) return { state, effects: [] };
      const paint = stampBrush(state.paint, event.x, event.y);
      return { state: { ...state, paint }, effects: [] };
    }

    case 'clear-paint':
      return { state: { ...state, paint: new Set() }, effects: [] };

    case 'submit': {
      if (state.paint.size === 0) return { state, effects: [] }; // control disabled
      return sendCommand(state, cellsToPoints(state.paint));
    }

    case 'submit-raw':
      // programmatic submission path (scripting and tests); skips the brush
      return sendCommand(state, event.points);

    case 'set-overlay':
      return { state: { ...state, overlay: event.overlay }, effects: [] };

    case 'toggle-trails':
      return { state: { ...state, showTrails: !state.showTrails }, effects: [] };

    case 'toggle-discoveries':
      return { state: { ...state, showDiscoveries: !state.showDiscoveries }, effects: [] };
  }
}

function sendCommand(
  state: ConsoleState,
  points: [number, number][],
): { state: ConsoleState; effects: Effect[] } {
  const nonce = `c-${state.nonceCounter + 1}`;
  const pending = new Map(state.pending);
  pending.set(nonce, points);
  return {
    state: { ...state, pending, nonceCounter: state.nonceCounter + 1 },
    effects: [{ kind: 'send', data: encodeCommand(nonce, points) }],
  };
}

function onServer(
  state: ConsoleState,
  msg: ServerMessage,
  now: number,
): { state: ConsoleState; effects: Effect[] } {
  switch (msg.type) {
    case 'hello':
      return { state: { ...state, hello: msg }, effects: [] };

    case 'frame': {
      // displayed tick is monotone: a late or replayed frame never rewinds
      if (state.frame !== null && msg.tick <= state.frame.tick) {
        return { state, effects: [] };
      }
      const trails = advanceTrails(state.trails, msg);
      return { state: { ...state, frame: msg, frameAtMs: now, trails }, effects: [] };
    }

    case 'ack': {
      if (msg.nonce === null || !state.pending.has(msg.nonce)) {
        return { state, effects: [] };
      }
      const pending = new Map(state.pending);
      pending.delete(msg.nonce);
      // the shaded region is now owned by the swarm
      return { state: { ...state, pending, paint: new Set(), armed: false }, effects: [] };
    }

    case 'error': {
      const nonce = msg.nonce ?? null;
      if (nonce !== null && state.pending.has(nonce)) {
        const pending = new Map(state.pending);
        pending.delete(nonce);
        const text = `command rejected: ${msg.reason}`;
        return {
          state: { ...state, pending, toasts: [...state.toasts, text] },
          effects: [{ kind: 'toast', text }],
        };
      }
      const text = `server error: ${msg.reason}`;
      return {
        state: { ...state, toasts: [...state.toasts, text] },
        effects: [{ kind: 'toast', text }],
      };
    }

    case 'grid':
      return { state, effects: [] };
  }
}

function advanceTrails(
  trails: Map<string, TrailPoint[]>,
  frame: FrameMsg,
): Map<string, TrailPoint[]> {
  const next = new Map(trails);
  for (const agent of frame.agents) {
    if (!agent.alive) continue;
    const prev = next.get(agent.id) ?? [];
    const appended = [...prev, { t: frame.t, x: agent.state[0], y: agent.state[1] }];
    next.set(
      agent.id,
      appended.filter((p) => p.t >= frame.t - TRAIL_SECONDS),
    );
  }
  return next;
}

/** True when the stream has gone quiet long enough to warn the operator. */
export function isStale(state: ConsoleState, now: number): boolean {
  return state.frameAtMs !== null && now - state.frameAtMs > STALE_MS;
}
