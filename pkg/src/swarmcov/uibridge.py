"""Operator endpoint: frames out, region commands in, over one websocket.

The bridge sits between the synchronous tick loop and any number of
connected consoles. The two sides meet at exactly two thread-safe points:

  * a latest-frame mailbox: the engine overwrites it every tick; each
    client coroutine sends whatever is newest when it wakes up, so a stalled
    client only ever skips intermediate frames and can never delay the loop;
  * a command queue: the socket handler validates and enqueues commands,
    the engine drains the queue at the start of each tick, so an accepted
    command shapes the very next frame.

Message schema (versioned, documented with examples in docs/protocol.md):
server sends hello / frame / ack / error / grid; clients send command /
grid_request.
"""

from __future__ import annotations

import asyncio
import json
import logging
import queue
import threading
import time

from fastapi import FastAPI, WebSocket, WebSocketDisconnect

SCHEMA_VERSION = 1

# command points may overshoot the unit box by this much and get clamped
CLAMP_TOL = 1e-6


class Bridge:
    """Shared state between the tick loop and the socket handlers."""

    def __init__(self, scenario_meta: dict | None = None):
        self.scenario_meta = scenario_meta or {}
        self._lock = threading.Lock()
        self._latest: dict | None = None
        self._full_grids: dict = {}
        self._seq = 0
        self._commands: "queue.Queue[list]" = queue.Queue()
        self._waiters: set[tuple[asyncio.Event, asyncio.AbstractEventLoop]] = set()

    # engine side ---------------------------------------------------------

    def publish(self, payload: dict, full_grids: dict | None = None) -> None:
        """Install the newest frame; wakes every connected client."""
        with self._lock:
            self._seq += 1
            payload = dict(payload)
            payload["type"] = "frame"
            payload["seq"] = self._seq
            self._latest = payload
            if full_grids:
                self._full_grids = dict(full_grids)
            waiters = list(self._waiters)
        for event, loop in waiters:
            try:
                loop.call_soon_threadsafe(event.set)
            except RuntimeError:
                pass  # client loop already gone

    def drain_commands(self) -> list[list]:
        """All commands accepted since the last drain, in arrival order."""
        out = []
        while True:
            try:
                out.append(self._commands.get_nowait())
            except queue.Empty:
                return out

    # socket side ---------------------------------------------------------

    def latest(self) -> tuple[dict | None, int]:
        with self._lock:
            return self._latest, self._seq

    def full_grid(self, which: str):
        with self._lock:
            return self._full_grids.get(which)

    def register_waiter(self, event: asyncio.Event, loop) -> None:
        with self._lock:
            self._waiters.add((event, loop))

    def unregister_waiter(self, event: asyncio.Event, loop) -> None:
        with self._lock:
            self._waiters.discard((event, loop))

    def ingest_command(self, msg: dict) -> dict:
        """Validate one command message; enqueue it and build the reply.

        Returns an ack carrying the client nonce, or an error listing the
        offending point indices. Points marginally outside the unit box are
        clamped; anything worse is rejected.
        """
        nonce = msg.get("nonce")
        points = msg.get("points")
        if not isinstance(points, list) or len(points) == 0:
            return {"type": "error", "reason": "empty command", "nonce": nonce}
        cleaned = []
        offenders = []
        for i, p in enumerate(points):
            try:
                x, y = float(p[0]), float(p[1])
            except (TypeError, ValueError, IndexError):
                offenders.append(i)
                continue
            if not (-CLAMP_TOL <= x <= 1.0 + CLAMP_TOL and -CLAMP_TOL <= y <= 1.0 + CLAMP_TOL):
                offenders.append(i)
                continue
            cleaned.append((min(max(x, 0.0), 1.0), min(max(y, 0.0), 1.0)))
        if offenders:
            return {
                "type": "error",
                "reason": "points outside the unit workspace",
                "offending": offenders,
                "nonce": nonce,
            }
        self._commands.put(cleaned)
        return {"type": "ack", "nonce": nonce}

    def hello(self) -> dict:
        return {"type": "hello", "schema": SCHEMA_VERSION, "scenario": self.scenario_meta}


def build_app(bridge: Bridge) -> FastAPI:
    app = FastAPI()

    @app.websocket("/ws")
    async def ws_endpoint(ws: WebSocket):
        await ws.accept()
        await ws.send_json(bridge.hello())
        loop = asyncio.get_running_loop()
        wake = asyncio.Event()
        bridge.register_waiter(wake, loop)
        sent_seq = 0

        async def send_latest():
            nonlocal sent_seq
            payload, seq = bridge.latest()
            if payload is not None and seq > sent_seq:
                try:
                    text = json.dumps(payload)
                except (TypeError, ValueError) as exc:
                    logging.getLogger(__name__).warning("frame %s not serializable: %s", seq, exc)
                    sent_seq = seq  # skip the bad frame, stay live
                    return
                await ws.send_text(text)
                sent_seq = seq

        async def sender():
            while True:
                await wake.wait()
                wake.clear()
                await send_latest()

        async def receiver():
            while True:
                raw = await ws.receive_text()
                try:
                    msg = json.loads(raw)
                    if not isinstance(msg, dict):
                        raise ValueError("not an object")
                except (json.JSONDecodeError, ValueError) as exc:
                    await ws.send_json({"type": "error", "reason": f"malformed JSON: {exc}"})
                    continue
                kind = msg.get("type")
                if kind == "command":
                    await ws.send_json(bridge.ingest_command(msg))
                elif kind == "grid_request":
                    which = msg.get("which", "phi")
                    values = bridge.full_grid(which)
                    if values is None:
                        await ws.send_json(
                            {"type": "error", "reason": f"no grid available for {which!r}"}
                        )
                    else:
                        await ws.send_json({"type": "grid", "which": which, "values": values})
                else:
                    await ws.send_json({"type": "error", "reason": f"unknown type {kind!r}"})

        try:
            await send_latest()
            recv_task = asyncio.ensure_future(receiver())
            send_task = asyncio.ensure_future(sender())
            done, pending = await asyncio.wait(
                {recv_task, send_task}, return_when=asyncio.FIRST_COMPLETED
            )
            for task in pending:
                task.cancel()
            for task in done:
                exc = task.exception()
                if exc is not None and not isinstance(exc, (WebSocketDisconnect, RuntimeError)):
                    raise exc
        except WebSocketDisconnect:
            pass
        finally:
            bridge.unregister_waiter(wake, loop)

    return app


def start_server(bridge: Bridge, port: int, host: str = "127.0.0.1"):
    """Run the bridge app in a daemon thread; returns the uvicorn server."""
    import uvicorn

    config = uvicorn.Config(
        build_app(bridge), host=host, port=port, log_level="warning", ws="websockets"
    )
    server = uvicorn.Server(config)
    thread = threading.Thread(target=server.run, name="uibridge", daemon=True)
    thread.start()
    deadline = time.monotonic() + 10.0
    while not server.started:
        if time.monotonic() > deadline:
            raise RuntimeError("operator bridge failed to start")
        time.sleep(0.02)
    return server
