"""Simulated inter-agent communication.

Agents exchange messages once per tick through a connectivity model with
per-message loss and optional delivery latency. Every message is a
broadcast: it reaches each live peer the sender has an edge to this tick,
subject to an independent drop draw. All randomness is derived from
(seed, tick), so a delivery trace replays identically regardless of how the
surrounding code is refactored.

Disabled agents vanish silently: they neither send nor receive, and peers
notice only because their shared statistics go stale.

DiscoveryGossip implements the task-update protocol on top: an agent
rebroadcasts each discovery it knows every REBROADCAST_PERIOD ticks until it
has heard every live peer echo that discovery back, which doubles as the
acknowledgment.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Iterable

import numpy as np

MSG_SPECTRUM = "spectrum_share"
MSG_DISCOVERY = "discovery"
MSG_USER_COMMAND = "user_command"
MSG_AGENT_DISABLED = "agent_disabled"

TOPOLOGY_FULL = "full"
TOPOLOGY_RANDOM = "random"
TOPOLOGY_STATIC = "static"

REBROADCAST_PERIOD = 10


class NetError(ValueError):
    """Invalid network configuration or message."""


@dataclass(frozen=True)
class NetModel:
    topology: str = TOPOLOGY_FULL
    edge_prob: float = 1.0
    static_edges: tuple[tuple[str, str], ...] = ()
    drop_prob: float = 0.0
    latency: int = 0
    seed: int = 0

    def __post_init__(self):
        if self.topology not in (TOPOLOGY_FULL, TOPOLOGY_RANDOM, TOPOLOGY_STATIC):
            raise NetError(f"unknown topology {self.topology!r}")
        if not (0.0 <= self.edge_prob <= 1.0):
            raise NetError("edge_prob must be in [0, 1]")
        if not (0.0 <= self.drop_prob <= 1.0):
            raise NetError("drop_prob must be in [0, 1]")
        if self.latency < 0:
            raise NetError("latency must be nonnegative")


@dataclass(frozen=True)
class SwarmMessage:
    kind: str
    sender: str
    payload: Any
    sent_tick: int

    def __post_init__(self):
        if self.kind not in (MSG_SPECTRUM, MSG_DISCOVERY, MSG_USER_COMMAND, MSG_AGENT_DISABLED):
            raise NetError(f"unknown message kind {self.kind!r}")


def broadcast_discovery(sender: str, kind: str, location, tick: int) -> SwarmMessage:
    """Discovery announcement; the discoverer registers locally the same tick."""
    x, y = float(location[0]), float(location[1])
    if not (0.0 <= x <= 1.0 and 0.0 <= y <= 1.0):
        raise NetError(f"discovery location {location!r} outside the unit workspace")
    return SwarmMessage(MSG_DISCOVERY, sender, {"kind": kind, "location": (x, y)}, tick)


class SwarmNetwork:
    """Per-tick message transport with seeded connectivity and loss."""

    def __init__(self, model: NetModel):
        self.model = model
        self._pending: dict[int, list[tuple[str, SwarmMessage]]] = {}
        self.log: list[dict] = []
        self.sent_count = 0
        self.delivered_count = 0

    def _edges(self, live: list[str], tick: int) -> set[frozenset]:
        m = self.model
        pairs = [
            (a, b) for i, a in enumerate(live) for b in live[i + 1 :]
        ]
        if m.topology == TOPOLOGY_FULL:
            return {frozenset(p) for p in pairs}
        if m.topology == TOPOLOGY_STATIC:
            allowed = {frozenset(e) for e in m.static_edges}
            return {frozenset(p) for p in pairs if frozenset(p) in allowed}
        rng = np.random.default_rng([self.model.seed, 1, tick])
        draws = rng.random(len(pairs))
        return {frozenset(p) for p, d in zip(pairs, draws) if d < m.edge_prob}

    def exchange(
        self,
        live_ids: Iterable[str],
        outboxes: dict[str, list[SwarmMessage]],
        tick: int,
    ) -> dict[str, list[SwarmMessage]]:
        """Deliver this tick's broadcasts; returns an inbox per live agent.

        Deterministic in (seed, tick): edge and drop draws are consumed in
        sorted agent order.
        """
        live = sorted(live_ids)
        live_set = set(live)
        for sender in outboxes:
            if sender not in live_set:
                raise NetError(f"outbox for non-live agent {sender!r}")
        edges = self._edges(live, tick)
        drop_rng = np.random.default_rng([self.model.seed, 2, tick])

        inboxes: dict[str, list[SwarmMessage]] = {a: [] for a in live}
        for sender in sorted(outboxes):
            for msg in outboxes[sender]:
                for dst in live:
                    if dst == sender:
                        continue
                    if frozenset((sender, dst)) not in edges:
                        continue
                    self.sent_count += 1
                    if self.model.drop_prob > 0 and drop_rng.random() < self.model.drop_prob:
                        continue
                    deliver_at = tick + self.model.latency
                    self._pending.setdefault(deliver_at, []).append((dst, msg))

        for dst, msg in self._pending.pop(tick, []):
            if dst not in live_set:
                continue  # died while the message was in flight
            inboxes[dst].append(msg)
            self.delivered_count += 1
            self.log.append(
                {
                    "tick": tick,
                    "sender": msg.sender,
                    "recipient": dst,
                    "kind": msg.kind,
                    "sent_tick": msg.sent_tick,
                }
            )
        return inboxes

    def stats(self) -> dict:
        return {
            "offered": self.sent_count,
            "delivered": self.delivered_count,
            "in_flight": sum(len(v) for v in self._pending.values()),
        }

    def export_log_jsonl(self, path) -> None:
        with open(path, "w") as fh:
            for rec in self.log:
                fh.write(json.dumps(rec, sort_keys=True) + "\n")


def _discovery_key(kind: str, location) -> tuple:
    # quantized so float drift in rebroadcasts cannot split one discovery
    return (kind, round(location[0], 6), round(location[1], 6))


@dataclass
class DiscoveryGossip:
    """Rebroadcast-until-echo bookkeeping for one agent's discoveries."""

    owner: str
    known: dict = field(default_factory=dict)  # key -> (kind, location)
    unconfirmed: dict = field(default_factory=dict)  # key -> set of peer ids

    def note_local(self, kind: str, location, peers: Iterable[str]) -> None:
        key = _discovery_key(kind, location)
        if key in self.known:
            return
        self.known[key] = (kind, tuple(location))
        self.unconfirmed[key] = set(peers)

    def note_received(self, sender: str, kind: str, location, peers: Iterable[str]) -> None:
        """A peer's announcement both informs us and acknowledges the sender."""
        key = _discovery_key(kind, location)
        if key not in self.known:
            self.known[key] = (kind, tuple(location))
            # everyone except the sender still needs to hear it from us
            self.unconfirmed[key] = {p for p in peers if p != sender}
        else:
            self.unconfirmed.get(key, set()).discard(sender)

    def outbox_messages(self, tick: int, live_peers: Iterable[str]) -> list[SwarmMessage]:
        """Periodic rebroadcasts for discoveries not yet echoed by every live peer."""
        if tick % REBROADCAST_PERIOD != 0:
            return []
        alive = set(live_peers)
        out = []
        for key in sorted(self.unconfirmed):
            self.unconfirmed[key] &= alive
            if self.unconfirmed[key]:
                kind, location = self.known[key]
                out.append(broadcast_discovery(self.owner, kind, location, tick))
        return out
