"""Deterministic tick-loop simulation of the swarm and its world.

Per tick, in order: scripted/operator events fire, agents sense nearby
objects and announce discoveries, hazard dwell is accounted (hazards harm
whether or not they have been discovered yet), messages are exchanged, each
live agent fuses shared statistics and plans/steps, the agent folds its new
position into its running statistics, and a snapshot frame is emitted.

Everything is a pure function of (scenario, seed): reruns produce
bit-identical frame logs, which the regression suite depends on.
"""

from __future__ import annotations

import hashlib
import json
import time as _time
from dataclasses import dataclass, field

import numpy as np

from swarmcov import controller as ctl
from swarmcov import dynamics as dyn
from swarmcov import taskspec as ts
from swarmcov.scenario import (
    EVENT_AGENT_FAILURE,
    EVENT_CONVERT,
    EVENT_USER_COMMAND,
    Scenario,
    ScenarioError,
)
from swarmcov.spectral import (
    DensityGrid,
    SpectralConfig,
    Spectrum,
    decompose_density,
    ergodic_metric,
    reconstruct_display,
)
from swarmcov.swarmnet import (
    MSG_DISCOVERY,
    MSG_SPECTRUM,
    DiscoveryGossip,
    NetModel,
    SwarmMessage,
    SwarmNetwork,
    broadcast_discovery,
)
from swarmcov.taskspec import ROLE_BLOCKER, WorkspaceTransform


class SimulationAbort(RuntimeError):
    """Planner diverged; carries the frame index where the run stopped."""

    def __init__(self, tick: int, cause: Exception):
        super().__init__(f"simulation aborted at tick {tick}: {cause}")
        self.tick = tick
        self.cause = cause


@dataclass
class WorldObject:
    kind: str  # ts.KIND_ATTRACT or ts.KIND_REPEL
    location: tuple[float, float]  # unit coordinates
    discovered_tick: int | None = None


@dataclass
class AgentFrame:
    agent_id: str
    state: list[float]
    alive: bool
    metric: float
    phi_digest: str
    path: list[list[float]]


@dataclass
class SnapshotFrame:
    tick: int
    t: float
    agents: list[AgentFrame]
    fused_metric: float
    discoveries: list[dict]
    user_command: list[list[float]] | None

    def to_json_dict(self) -> dict:
        return {
            "tick": self.tick,
            "t": round(self.t, 9),
            "agents": [
                {
                    "id": a.agent_id,
                    "state": a.state,
                    "alive": a.alive,
                    "metric": a.metric,
                    "phi_digest": a.phi_digest,
                    "path": a.path,
                }
                for a in self.agents
            ],
            "fused_metric": self.fused_metric,
            "discoveries": self.discoveries,
            "user_command": self.user_command,
        }


@dataclass
class RunResult:
    scenario: Scenario
    frames: list[SnapshotFrame]
    disablements: list[dict]
    discovery_log: list[dict]
    net: SwarmNetwork
    summary: dict = field(default_factory=dict)

    def metric_series(self) -> tuple[np.ndarray, dict[str, np.ndarray], np.ndarray]:
        """(times, per-agent metric arrays, fused metric array)."""
        times = np.array([f.t for f in self.frames])
        fused = np.array([f.fused_metric for f in self.frames])
        per = {
            a.agent_id: np.array([f.agents[i].metric for f in self.frames])
            for i, a in enumerate(self.frames[0].agents)
        }
        return times, per, fused

    def positions(self, agent_id: str) -> np.ndarray:
        idx = [a.agent_id for a in self.frames[0].agents].index(agent_id)
        return np.array([f.agents[idx].state[:2] for f in self.frames])

    def alive_flags(self, agent_id: str) -> np.ndarray:
        idx = [a.agent_id for a in self.frames[0].agents].index(agent_id)
        return np.array([f.agents[idx].alive for f in self.frames])


class _Agent:
    def __init__(self, spec, model, x0, cfg: SpectralConfig, scenario: Scenario):
        self.spec = spec
        self.agent_id = spec.agent_id
        self.model = model
        self.x = x0
        self.alive = True
        self.dwell: dict[int, float] = {}  # hazard index -> accumulated seconds
        self.mem = ctl.fresh_memory(cfg)
        self.task = ts.TaskSpec(role=spec.role)
        self.task_dirty = True
        self.phi: Spectrum | None = None
        self.phi_grid: DensityGrid | None = None
        self.phi_digest = ""
        self.gossip = DiscoveryGossip(owner=spec.agent_id)
        self.plan: ctl.Plan | None = None
        self.plan_tick = -(10**9)
        self._scenario = scenario

    def position(self) -> np.ndarray:
        return dyn.project_position(self.model, self.x)

    def apply_discovery(self, kind: str, location) -> None:
        """Register an announced object, converting an attraction point that
        turns out to be a hazard at the same spot."""
        if kind == ts.KIND_REPEL:
            self.task = ts.remove_discovery(self.task, ts.KIND_ATTRACT, location)
        before = self.task
        self.task = ts.register_discovery(self.task, kind, location)
        if self.task is not before:
            self.task_dirty = True

    def apply_command(self, points, seed: int) -> None:
        self.task = ts.add_user_command(self.task, points, seed)
        self.task_dirty = True

    def recompile_phi(self, cfg: SpectralConfig, resolution: int) -> None:
        grid = ts.compile_density(self.task, resolution, rng_seed=self.task.user_seed)
        self.phi_grid = grid
        self.phi = decompose_density(grid, cfg)
        self.phi_digest = _grid_digest(grid)
        self.task_dirty = False
        self.plan_tick = -(10**9)  # force a replan against the new target


def _grid_digest(grid: DensityGrid) -> str:
    return hashlib.sha1(np.ascontiguousarray(grid.values).tobytes()).hexdigest()[:16]


def _round_path(path: np.ndarray) -> list[list[float]]:
    return [[round(float(v), 4) for v in row[:2]] for row in path]


def run(scenario: Scenario, bridge=None, pace: float = 0.0) -> RunResult:
    """Execute a scenario; returns the frame log and bookkeeping.

    bridge, when given, receives every frame (latest-wins for slow clients)
    and contributes operator commands drained at each tick start. pace > 0
    sleeps that many seconds per tick so humans can watch live runs.
    """
    cfg = SpectralConfig(
        num_coeffs=scenario.num_coeffs,
        dims=2,
        lengths=(1.0, 1.0),
        metric_weight=scenario.metric_weight,
    )
    transform = WorkspaceTransform(scenario.world_min, scenario.world_max)
    dt = scenario.tick_dt
    n_ticks = scenario.num_ticks
    params = scenario.planner
    res = scenario.grid_resolution

    agents: list[_Agent] = []
    for spec in scenario.agents:
        model = dyn.model_from_kind(spec.model_kind)
        start_unit = np.clip(transform.world_to_unit(spec.start), 0.0, 1.0)
        if not np.isfinite(start_unit).all():
            raise ScenarioError(f"agent {spec.agent_id}: start position is not finite")
        x0 = model.initial_state(start_unit, spec.heading)
        agents.append(_Agent(spec, model, x0, cfg, scenario))
    by_id = {a.agent_id: a for a in agents}

    objects: list[WorldObject] = []
    for p in scenario.hidden_ees:
        objects.append(WorldObject(ts.KIND_ATTRACT, _unit_point(transform, p)))
    for p in scenario.hidden_dds:
        objects.append(WorldObject(ts.KIND_REPEL, _unit_point(transform, p)))

    events_by_tick: dict[int, list] = {}
    for ev in scenario.events:
        tick = min(int(ev.time / dt + 1e-9), n_ticks - 1)
        events_by_tick.setdefault(tick, []).append(ev)

    net = SwarmNetwork(
        NetModel(
            topology=scenario.net.topology,
            edge_prob=scenario.net.edge_prob,
            static_edges=scenario.net.static_edges,
            drop_prob=scenario.net.drop_prob,
            latency=scenario.net.latency,
            seed=scenario.net.seed + 1_000_003 * scenario.seed,
        )
    )

    # global observer task state: tracks what the swarm as a whole has
    # announced, compiled with the regular role; the fused metric is
    # measured against this reference target
    ref_task = ts.TaskSpec()
    ref_phi = _ref_phi(ref_task, res, cfg)

    frames: list[SnapshotFrame] = []
    disablements: list[dict] = []
    discovery_log: list[dict] = []
    active_command: list[list[float]] | None = None
    command_counter = 0

    for tick in range(n_ticks):
        t = tick * dt
        ref_dirty = False

        # (1) operator + scripted events
        pending_points: list[list] = []
        if bridge is not None:
            pending_points.extend(bridge.drain_commands())
        for ev in events_by_tick.get(tick, ()):
            if ev.kind == EVENT_USER_COMMAND:
                pending_points.append([_unit_point(transform, p) for p in ev.points])
            elif ev.kind == EVENT_AGENT_FAILURE:
                by_id[ev.agent_id].alive = False
            elif ev.kind == EVENT_CONVERT:
                loc = _unit_point(transform, ev.location)
                for obj in objects:
                    if obj.kind == ts.KIND_ATTRACT and _near(obj.location, loc, 1e-6):
                        obj.kind = ts.KIND_REPEL
                        obj.discovered_tick = None  # must be re-sensed as a hazard
        for points in pending_points:
            command_counter += 1
            seed = scenario.seed * 1_000_003 + command_counter
            for agent in agents:
                if agent.alive:
                    agent.apply_command(points, seed)
            ref_task = ts.add_user_command(ref_task, points, seed)
            ref_dirty = True
            active_command = [[float(p[0]), float(p[1])] for p in points]

        # (2) sensing: omniscient within radius, no false positives
        outboxes: dict[str, list[SwarmMessage]] = {}
        for agent in agents:
            if not agent.alive:
                continue
            pos = agent.position()
            for obj in objects:
                if obj.discovered_tick is not None:
                    continue
                if np.hypot(pos[0] - obj.location[0], pos[1] - obj.location[1]) <= scenario.sensing_radius:
                    obj.discovered_tick = tick
                    agent.apply_discovery(obj.kind, obj.location)
                    peers = [a.agent_id for a in agents if a.alive and a is not agent]
                    agent.gossip.note_local(obj.kind, obj.location, peers)
                    outboxes.setdefault(agent.agent_id, []).append(
                        broadcast_discovery(agent.agent_id, obj.kind, obj.location, tick)
                    )
                    if obj.kind == ts.KIND_REPEL:
                        ref_task = ts.remove_discovery(ref_task, ts.KIND_ATTRACT, obj.location)
                    ref_task = ts.register_discovery(ref_task, obj.kind, obj.location)
                    ref_dirty = True
                    discovery_log.append(
                        {
                            "tick": tick,
                            "kind": obj.kind,
                            "location": list(obj.location),
                            "by": agent.agent_id,
                        }
                    )

        # (3) hazard dwell accounting (hazards harm even before discovery)
        for agent in agents:
            if not agent.alive or agent.spec.role == ROLE_BLOCKER:
                continue
            pos = agent.position()
            for oi, obj in enumerate(objects):
                if obj.kind != ts.KIND_REPEL:
                    continue
                if np.hypot(pos[0] - obj.location[0], pos[1] - obj.location[1]) <= scenario.dd_radius:
                    acc = agent.dwell.get(oi, 0.0) + dt
                    agent.dwell[oi] = acc
                    if acc >= scenario.dd_dwell - 1e-12:
                        agent.alive = False
                        disablements.append(
                            {"tick": tick, "agent": agent.agent_id, "hazard": list(obj.location)}
                        )
                        break

        # (4) network exchange
        live_ids = [a.agent_id for a in agents if a.alive]
        for agent in agents:
            if not agent.alive:
                continue
            box = outboxes.setdefault(agent.agent_id, [])
            box.append(
                SwarmMessage(
                    MSG_SPECTRUM,
                    agent.agent_id,
                    {"coeffs": agent.mem.coeffs, "elapsed": agent.mem.elapsed},
                    tick,
                )
            )
            peers = [i for i in live_ids if i != agent.agent_id]
            box.extend(agent.gossip.outbox_messages(tick, peers))
        outboxes = {k: v for k, v in outboxes.items() if k in live_ids}
        inboxes = net.exchange(live_ids, outboxes, tick)
        for agent in agents:
            if not agent.alive:
                continue
            for msg in inboxes.get(agent.agent_id, ()):
                if msg.kind == MSG_SPECTRUM:
                    agent.mem = ctl.record_peer(
                        agent.mem,
                        msg.sender,
                        msg.payload["coeffs"],
                        msg.payload["elapsed"],
                    )
                elif msg.kind == MSG_DISCOVERY:
                    kind = msg.payload["kind"]
                    loc = msg.payload["location"]
                    agent.apply_discovery(kind, loc)
                    peers = [i for i in live_ids if i != agent.agent_id]
                    agent.gossip.note_received(msg.sender, kind, loc, peers)

        # (5) plan and step each live agent from its tick-start snapshot
        for agent in agents:
            if not agent.alive:
                continue
            if agent.task_dirty or agent.phi is None:
                agent.recompile_phi(cfg, res)
            if tick - agent.plan_tick >= params.replan_period or agent.plan is None:
                try:
                    agent.plan = ctl.plan(agent.model, agent.x, agent.mem, agent.phi, params)
                except ctl.PlanDivergenceError as exc:
                    raise SimulationAbort(tick, exc) from exc
                agent.plan_tick = tick
            u = agent.plan.controls[min(tick - agent.plan_tick, params.steps - 1)]
            agent.x = dyn.step(agent.model, agent.x, u, dt)
            # (6) fold the new position into the running statistics
            agent.mem = ctl.accumulate_own(agent.mem, agent.position(), dt)

        if ref_dirty:
            ref_phi = _ref_phi(ref_task, res, cfg)

        # (7) snapshot
        fused_metric = _collective_metric(agents, cfg, ref_phi)
        frame_agents = []
        for agent in agents:
            own_view = ctl.fuse_spectra(agent.mem, params.staleness_window)
            metric = ergodic_metric(own_view, agent.phi) if agent.phi is not None else 0.0
            frame_agents.append(
                AgentFrame(
                    agent_id=agent.agent_id,
                    state=[float(v) for v in agent.x],
                    alive=agent.alive,
                    metric=metric,
                    phi_digest=agent.phi_digest,
                    path=_round_path(agent.plan.path) if agent.plan is not None else [],
                )
            )
        frame = SnapshotFrame(
            tick=tick,
            t=(tick + 1) * dt,
            agents=frame_agents,
            fused_metric=fused_metric,
            discoveries=list(discovery_log),
            user_command=active_command,
        )
        frames.append(frame)
        if bridge is not None:
            payload, full_grids = _wire_frame(frame, agents, cfg)
            bridge.publish(payload, full_grids)
        if pace > 0:
            _time.sleep(pace)

    result = RunResult(
        scenario=scenario,
        frames=frames,
        disablements=disablements,
        discovery_log=discovery_log,
        net=net,
    )
    result.summary = summarize(result, objects)
    return result


def _unit_point(transform: WorkspaceTransform, p) -> tuple[float, float]:
    u = transform.world_to_unit(p)
    if not ((0.0 <= u[0] <= 1.0) and (0.0 <= u[1] <= 1.0)):
        raise ScenarioError(f"world point {tuple(p)} falls outside the workspace box")
    return (float(u[0]), float(u[1]))


def _near(a, b, tol: float) -> bool:
    return abs(a[0] - b[0]) <= tol and abs(a[1] - b[1]) <= tol


def _ref_phi(ref_task: ts.TaskSpec, res: int, cfg: SpectralConfig) -> Spectrum:
    grid = ts.compile_density(ref_task, res, rng_seed=ref_task.user_seed)
    return decompose_density(grid, cfg)


def _collective_metric(agents: list[_Agent], cfg: SpectralConfig, ref_phi: Spectrum) -> float:
    """Duration-weighted average of every agent's accumulated statistics vs
    the reference target; the outside observer's coverage score.

    Disabled agents stop accumulating, but the coverage they already flew
    stays part of the collective record (with fading weight as the
    survivors' durations grow)."""
    total = sum(a.mem.elapsed for a in agents)
    if total <= 0:
        avg = sum(a.mem.coeffs for a in agents) / len(agents)
    else:
        avg = np.zeros(cfg.size)
        for a in agents:
            avg += (a.mem.elapsed / total) * a.mem.coeffs
    return ergodic_metric(Spectrum(cfg, avg), ref_phi)


def _wire_frame(
    frame: SnapshotFrame, agents: list[_Agent], cfg: SpectralConfig
) -> tuple[dict, dict]:
    """Console frame payload with display grids, plus full-resolution grids
    for on-demand requests."""
    payload = frame.to_json_dict()
    full: dict = {}
    first_live = next((a for a in agents if a.alive and a.phi_grid is not None), None)
    if first_live is not None:
        payload["phi_grid"] = _downsample(first_live.phi_grid.values, 50)
        full["phi"] = [[float(v) for v in row] for row in first_live.phi_grid.values]
    total = sum(a.mem.elapsed for a in agents)
    if total > 0:
        avg = np.zeros(cfg.size)
        for a in agents:
            avg += (a.mem.elapsed / total) * a.mem.coeffs
        recon = reconstruct_display(Spectrum(cfg, avg), 50)
        payload["recon_grid"] = _downsample(recon.values, 50)
        full["reconstruction"] = [[float(v) for v in row] for row in recon.values]
    return payload, full


def _downsample(values: np.ndarray, max_cells: int) -> list[list[float]]:
    n = values.shape[0]
    if n > max_cells:
        stride = int(np.ceil(n / max_cells))
        values = values[::stride, ::stride]
    return [[round(float(v), 6) for v in row] for row in values]


def summarize(result: RunResult, objects: list[WorldObject] | None = None) -> dict:
    """Headline numbers for a finished run."""
    if not result.frames:
        raise ValueError("cannot summarize an empty run log")
    times, per_agent, fused = result.metric_series()
    finite = fused[np.isfinite(fused)]
    summary = {
        "name": result.scenario.name,
        "seed": result.scenario.seed,
        "ticks": len(result.frames),
        "duration": times[-1],
        "initial_fused_metric": float(fused[0]) if np.isfinite(fused[0]) else None,
        "final_fused_metric": float(fused[-1]) if np.isfinite(fused[-1]) else None,
        "min_fused_metric": float(finite.min()) if finite.size else None,
        "agent_metrics": {
            aid: {"initial": float(series[0]), "final": float(series[-1])}
            for aid, series in per_agent.items()
        },
        "disablements": result.disablements,
        "discoveries": result.discovery_log,
        "network": result.net.stats(),
    }
    if objects:
        proximity = {}
        for obj in objects:
            key = f"{obj.kind}@({obj.location[0]:.3f},{obj.location[1]:.3f})"
            per_obj = {}
            for spec in result.scenario.agents:
                pos = result.positions(spec.agent_id)
                alive = result.alive_flags(spec.agent_id)
                d = np.hypot(pos[:, 0] - obj.location[0], pos[:, 1] - obj.location[1])
                live_mask = alive.astype(bool)
                if live_mask.any():
                    per_obj[spec.agent_id] = {
                        "frac_within_0.10": float((d[live_mask] <= 0.10).mean()),
                        "frac_within_0.15": float((d[live_mask] <= 0.15).mean()),
                    }
            proximity[key] = per_obj
        summary["proximity"] = proximity
    return summary


def write_outputs(result: RunResult, out_dir) -> None:
    """frames.jsonl, metric.csv, summary.json, messages.jsonl under out_dir."""
    import os

    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "frames.jsonl"), "w") as fh:
        for frame in result.frames:
            fh.write(json.dumps(frame.to_json_dict(), sort_keys=True) + "\n")
    times, per_agent, fused = result.metric_series()
    ids = list(per_agent)
    with open(os.path.join(out_dir, "metric.csv"), "w") as fh:
        fh.write("tick,t," + ",".join(f"metric_{i}" for i in ids) + ",fused\n")
        for row, (t, f) in enumerate(zip(times, fused)):
            cols = [str(row), repr(float(t))]
            cols += [repr(float(per_agent[i][row])) for i in ids]
            cols.append(repr(float(f)))
            fh.write(",".join(cols) + "\n")
    with open(os.path.join(out_dir, "summary.json"), "w") as fh:
        json.dump(result.summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    result.net.export_log_jsonl(os.path.join(out_dir, "messages.jsonl"))
