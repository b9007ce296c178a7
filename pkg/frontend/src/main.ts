// DOM wiring: one canvas, a few toggle buttons, one socket, one reducer.

import { connect, Connection } from './net.js';
import { drawToCanvas, render } from './render.js';
import { ConsoleState, Effect, initialState, Overlay, UiEvent, update } from './state.js';

const CANVAS_SIZE = 640;

function currentUrl(): string {
  const params = new URLSearchParams(window.location.search);
  const port = params.get('port') ?? '8571';
  const host = params.get('host') ?? '127.0.0.1';
  return `ws://${host}:${port}/ws`;
}

function main(): void {
  const canvas = document.getElementById('workspace') as HTMLCanvasElement;
  canvas.width = CANVAS_SIZE;
  canvas.height = CANVAS_SIZE;
  const ctx = canvas.getContext('2d')!;
  const toastBox = document.getElementById('toasts')!;

  let state: ConsoleState = initialState();
  let conn: Connection | null = null;

  const applyEffects = (effects: Effect[]) => {
    for (const effect of effects) {
      if (effect.kind === 'send' && conn) conn.send(effect.data);
      if (effect.kind === 'toast') {
        const div = document.createElement('div');
        div.className = 'toast';
        div.textContent = effect.text;
        toastBox.appendChild(div);
        setTimeout(() => div.remove(), 6000);
      }
    }
  };

  const dispatch = (event: UiEvent) => {
    const out = update(state, event);
    state = out.state;
    applyEffects(out.effects);
  };

  conn = connect(currentUrl(), dispatch);

  const toUnit = (ev: PointerEvent | MouseEvent): [number, number] => {
    const rect = canvas.getBoundingClientRect();
    const x = (ev.clientX - rect.left) / rect.width;
    const y = 1 - (ev.clientY - rect.top) / rect.height;
    return [x, y];
  };

  let dragging = false;
  let moved = false;
  canvas.addEventListener('pointerdown', (ev) => {
    dragging = true;
    moved = false;
    const [x, y] = toUnit(ev);
    dispatch({ kind: 'paint', x, y });
  });
  canvas.addEventListener('pointermove', (ev) => {
    if (!dragging) return;
    moved = true;
    const [x, y] = toUnit(ev);
    dispatch({ kind: 'paint', x, y });
  });
  canvas.addEventListener('pointerup', () => {
    dragging = false;
  });
  canvas.addEventListener('click', () => {
    // a plain click (no drag) arms or disarms the brush
    if (!moved) dispatch({ kind: 'arm-toggle' });
  });
  canvas.addEventListener('dblclick', () => {
    dispatch({ kind: 'submit' });
  });

  const bind = (id: string, event: UiEvent) => {
    document.getElementById(id)?.addEventListener('click', () => dispatch(event));
  };
  for (const overlay of ['phi', 'reconstruction', 'none'] as Overlay[]) {
    bind(`overlay-${overlay}`, { kind: 'set-overlay', overlay });
  }
  bind('toggle-trails', { kind: 'toggle-trails' });
  bind('toggle-discoveries', { kind: 'toggle-discoveries' });
  bind('clear-paint', { kind: 'clear-paint' });
  document.getElementById('send')?.addEventListener('click', () => dispatch({ kind: 'submit' }));

  const tick = () => {
    drawToCanvas(ctx, render(state, Date.now()), CANVAS_SIZE);
    requestAnimationFrame(tick);
  };
  tick();
}

main();
