// Wire types for the simulator's operator endpoint (schema 1).
// See docs/protocol.md in the repository root for examples.

export interface AgentSnapshot {
  id: string;
  state: number[];
  alive: boolean;
  metric: number;
  phi_digest: string;
  path: number[][];
}

export interface Discovery {
  tick: number;
  kind: 'EE' | 'DD';
  location: number[];
  by: string;
}

export interface FrameMsg {
  type: 'frame';
  seq: number;
  tick: number;
  t: number;
  agents: AgentSnapshot[];
  fused_metric: number;
  discoveries: Discovery[];
  user_command: number[][] | null;
  phi_grid?: number[][];
  recon_grid?: number[][];
}

export interface HelloMsg {
  type: 'hello';
  schema: number;
  scenario: {
    name?: string;
    agents?: { id: string; model: string; role: string }[];
    [key: string]: unknown;
  };
}

export interface AckMsg {
  type: 'ack';
  nonce: string | null;
}

export interface ErrorMsg {
  type: 'error';
  reason: string;
  offending?: number[];
  nonce?: string | null;
}

export interface GridMsg {
  type: 'grid';
  which: string;
  values: number[][];
}

export type ServerMessage = HelloMsg | FrameMsg | AckMsg | ErrorMsg | GridMsg;

export interface CommandMsg {
  type: 'command';
  nonce: string;
  points: [number, number][];
}

const SERVER_TYPES = new Set(['hello', 'frame', 'ack', 'error', 'grid']);

export function parseServerMessage(raw: string): ServerMessage {
  let data: unknown;
  try {
    data = JSON.parse(raw);
  } catch {
    throw new Error('server sent malformed JSON');
  }
  if (typeof data !== 'object' || data === null) {
    throw new Error('server message is not an object');
  }
  const type = (data as { type?: unknown }).type;
  if (typeof type !== 'string' || !SERVER_TYPES.has(type)) {
    throw new Error(`unknown server message type: ${String(type)}`);
  }
  return data as ServerMessage;
}

export function encodeCommand(nonce: string, points: [number, number][]): string {
  const msg: CommandMsg = { type: 'command', nonce, points };
  return JSON.stringify(msg);
}
