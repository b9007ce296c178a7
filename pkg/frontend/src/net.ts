// Thin socket wrapper: turns websocket callbacks into reducer events.

import { parseServerMessage } from './protocol.js';
import type { UiEvent } from './state.js';

export interface Connection {
  send(data: string): void;
  close(): void;
}

export function connect(url: string, dispatch: (e: UiEvent) => void): Connection {
  const ws = new WebSocket(url);
  ws.onopen = () => dispatch({ kind: 'socket-open' });
  ws.onclose = () => dispatch({ kind: 'socket-closed' });
  ws.onmessage = (ev: MessageEvent) => {
    try {
      dispatch({ kind: 'server', msg: parseServerMessage(String(ev.data)), now: Date.now() });
    } catch (err) {
      console.error('dropping unreadable server message:', err);
    }
  };
  return {
    send: (data: string) => {
      if (ws.readyState === WebSocket.OPEN) ws.send(data);
    },
    close: () => ws.close(),
  };
}
