"""Scenario configuration: what world to simulate and what happens in it.

A scenario file is YAML (key/value plus lists) with a versioned ``schema``
field. All geometry in the file is in world coordinates; the engine maps it
into the unit workspace through the world bounding box. See
scenarios/README snippets in the top-level README for the full schema.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import yaml

from swarmcov.controller import ControllerError, PlannerParams
from swarmcov.dynamics import MODEL_KINDS
from swarmcov.swarmnet import NetError, NetModel
from swarmcov.taskspec import ROLE_BLOCKER, ROLE_REGULAR

SCHEMA_VERSION = 1

EVENT_USER_COMMAND = "user_command"
EVENT_AGENT_FAILURE = "agent_failure"
EVENT_CONVERT = "convert_ee_to_dd"

EVENT_KINDS = (EVENT_USER_COMMAND, EVENT_AGENT_FAILURE, EVENT_CONVERT)


class ScenarioError(ValueError):
    """Scenario file or configuration rejected before tick 0."""


@dataclass(frozen=True)
class AgentSpec:
    agent_id: str
    model_kind: str = "single-integrator"
    role: str = ROLE_REGULAR
    start: tuple[float, float] = (0.5, 0.5)  # world coordinates
    heading: float = 0.0


@dataclass(frozen=True)
class ScenarioEvent:
    time: float
    kind: str
    points: tuple[tuple[float, float], ...] = ()  # user_command, world coords
    agent_id: str = ""  # agent_failure
    location: tuple[float, float] = (0.0, 0.0)  # convert_ee_to_dd, world coords


@dataclass(frozen=True)
class Scenario:
    name: str = "scenario"
    seed: int = 0
    duration: float = 60.0
    world_min: tuple[float, float] = (0.0, 0.0)
    world_max: tuple[float, float] = (1.0, 1.0)
    num_coeffs: int = 10
    metric_weight: float = 1.0
    grid_resolution: int = 50
    planner: PlannerParams = field(default_factory=PlannerParams)
    net: NetModel = field(default_factory=NetModel)
    sensing_radius: float = 0.1
    dd_radius: float = 0.1
    dd_dwell: float = 3.0
    agents: tuple[AgentSpec, ...] = ()
    hidden_ees: tuple[tuple[float, float], ...] = ()
    hidden_dds: tuple[tuple[float, float], ...] = ()
    events: tuple[ScenarioEvent, ...] = ()

    def __post_init__(self):
        if self.duration <= 0:
            raise ScenarioError("duration must be positive")
        if not self.agents:
            raise ScenarioError("scenario needs at least one agent")
        ids = [a.agent_id for a in self.agents]
        if len(set(ids)) != len(ids):
            raise ScenarioError("agent ids must be unique")
        for a in self.agents:
            if a.model_kind not in MODEL_KINDS:
                raise ScenarioError(f"agent {a.agent_id}: unknown model {a.model_kind!r}")
            if a.role not in (ROLE_REGULAR, ROLE_BLOCKER):
                raise ScenarioError(f"agent {a.agent_id}: unknown role {a.role!r}")
        if self.sensing_radius <= 0 or self.dd_radius <= 0:
            raise ScenarioError("radii must be positive")
        if self.dd_dwell <= 0:
            raise ScenarioError("dd_dwell must be positive")
        if self.num_coeffs < 1 or self.grid_resolution < 1:
            raise ScenarioError("num_coeffs and grid_resolution must be >= 1")
        if self.metric_weight <= 0:
            raise ScenarioError("metric_weight must be positive")
        for e in self.events:
            if e.kind not in EVENT_KINDS:
                raise ScenarioError(f"unknown event kind {e.kind!r}")
            if not (0.0 <= e.time <= self.duration):
                raise ScenarioError(f"event at t={e.time} outside the run duration")
            if e.kind == EVENT_USER_COMMAND and not e.points:
                raise ScenarioError("user_command event needs points")
            if e.kind == EVENT_AGENT_FAILURE and e.agent_id not in ids:
                raise ScenarioError(f"agent_failure event names unknown agent {e.agent_id!r}")
        lo, hi = self.world_min, self.world_max
        if not (hi[0] > lo[0] and hi[1] > lo[1]):
            raise ScenarioError("world box must have positive extent")

    @property
    def tick_dt(self) -> float:
        # single clock: the simulation tick is the planning step
        return self.planner.plan_dt

    @property
    def num_ticks(self) -> int:
        return round(self.duration / self.tick_dt)

    def with_seed(self, seed: int) -> "Scenario":
        return replace(self, seed=int(seed))


def _pair(value, what: str) -> tuple[float, float]:
    try:
        x, y = float(value[0]), float(value[1])
    except (TypeError, ValueError, IndexError) as exc:
        raise ScenarioError(f"{what} must be a pair of numbers, got {value!r}") from exc
    return (x, y)


def _point_list(value, what: str) -> tuple[tuple[float, float], ...]:
    if value is None:
        return ()
    return tuple(_pair(p, what) for p in value)


def scenario_from_dict(data: dict) -> Scenario:
    if not isinstance(data, dict):
        raise ScenarioError("scenario file must contain a mapping")
    schema = data.get("schema")
    if schema != SCHEMA_VERSION:
        raise ScenarioError(f"unsupported schema {schema!r}; expected {SCHEMA_VERSION}")

    world = data.get("world", {})
    spectral = data.get("spectral", {})
    planner_map = data.get("planner", {})
    net_map = data.get("network", {})

    try:
        planner = PlannerParams(
            horizon=float(planner_map.get("horizon", 2.0)),
            plan_dt=float(planner_map.get("plan_dt", 0.1)),
            control_weight=planner_map.get("control_weight", 0.01),
            metric_weight=planner_map.get("metric_weight"),
            replan_period=int(planner_map.get("replan_period", 1)),
            staleness_window=float(planner_map.get("staleness_window", 5.0)),
        )
    except ControllerError as exc:
        raise ScenarioError(f"planner: {exc}") from exc

    try:
        net = NetModel(
            topology=net_map.get("topology", "full"),
            edge_prob=float(net_map.get("edge_prob", 1.0)),
            static_edges=tuple(
                (str(a), str(b)) for a, b in net_map.get("static_edges", [])
            ),
            drop_prob=float(net_map.get("drop_prob", 0.0)),
            latency=int(net_map.get("latency", 0)),
            seed=int(net_map.get("seed", 0)),
        )
    except NetError as exc:
        raise ScenarioError(f"network: {exc}") from exc

    agents = []
    for a in data.get("agents", []):
        if "id" not in a:
            raise ScenarioError("every agent needs an id")
        agents.append(
            AgentSpec(
                agent_id=str(a["id"]),
                model_kind=a.get("model", "single-integrator"),
                role=a.get("role", ROLE_REGULAR),
                start=_pair(a.get("start", (0.5, 0.5)), "agent start"),
                heading=float(a.get("heading", 0.0)),
            )
        )

    events = []
    for e in data.get("events", []):
        kind = e.get("type")
        events.append(
            ScenarioEvent(
                time=float(e.get("time", 0.0)),
                kind=kind,
                points=_point_list(e.get("points"), "event point"),
                agent_id=str(e.get("agent", "")),
                location=_pair(e.get("location", (0.0, 0.0)), "event location"),
            )
        )

    try:
        return Scenario(
            name=str(data.get("name", "scenario")),
            seed=int(data.get("seed", 0)),
            duration=float(data.get("duration", 60.0)),
            world_min=_pair(world.get("min", (0.0, 0.0)), "world min"),
            world_max=_pair(world.get("max", (1.0, 1.0)), "world max"),
            num_coeffs=int(spectral.get("num_coeffs", 10)),
            metric_weight=float(spectral.get("metric_weight", 1.0)),
            grid_resolution=int(spectral.get("grid_resolution", 50)),
            planner=planner,
            net=net,
            sensing_radius=float(data.get("sensing_radius", 0.1)),
            dd_radius=float(data.get("dd_radius", 0.1)),
            dd_dwell=float(data.get("dd_dwell", 3.0)),
            agents=tuple(agents),
            hidden_ees=_point_list(data.get("hidden_ees"), "hidden EE"),
            hidden_dds=_point_list(data.get("hidden_dds"), "hidden DD"),
            events=tuple(events),
        )
    except (ControllerError, NetError) as exc:
        raise ScenarioError(str(exc)) from exc


def load_scenario(path) -> Scenario:
    try:
        with open(path) as fh:
            data = yaml.safe_load(fh)
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario file: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ScenarioError(f"scenario file is not valid YAML: {exc}") from exc
    return scenario_from_dict(data)
