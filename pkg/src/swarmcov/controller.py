"""Per-agent receding-horizon coverage controller.

Each agent keeps an ErgodicMemory: the running time-average of its own basis
statistics plus the latest statistics received from peers. Planning fuses
those into one spectrum, rolls a nominal (zero-control) trajectory over the
horizon, blends the memory average with the rollout's predicted contribution
in proportion to their durations, and integrates a costate backward along
the rollout. The control is read off the costate through the input map and
the inverse control weight, then clamped to the model bounds.

The backward pass is the exact adjoint of the discrete RK4 rollout, so
directional_cost_derivative matches finite differences of horizon_cost to
truncation error; that consistency is what the planner tests pin down.

Peers enter exclusively through their shared coefficient vectors: the
planner never sees peer trajectories or controls, which is what makes it
decentralized. With no (fresh) peers an agent plans as a solo unit.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Mapping, NamedTuple

import numpy as np

from swarmcov import _kernels
from swarmcov.dynamics import (
    DOUBLE_INTEGRATOR,
    AgentModel,
    control_matrix,
    step,
    step_jacobians,
    step_unclamped_control,
)
from swarmcov.spectral import SpectralConfig, Spectrum


class ControllerError(ValueError):
    """Contract violation in a planning operation."""


class PlanDivergenceError(RuntimeError):
    """Costate integration produced nonfinite values."""

    def __init__(self, tick: int):
        super().__init__(f"costate diverged at horizon step {tick}")
        self.tick = tick


@dataclass(frozen=True)
class PlannerParams:
    """Receding-horizon planner knobs.

    control_weight is the diagonal of the positive-definite control penalty
    (scalar means the same weight on every channel). metric_weight overrides
    the spectral config's weight when set.
    """

    horizon: float = 2.0
    plan_dt: float = 0.1
    control_weight: float | tuple[float, ...] = 0.01
    metric_weight: float | None = None
    replan_period: int = 1
    staleness_window: float = 5.0

    def __post_init__(self):
        if self.horizon <= 0 or self.plan_dt <= 0:
            raise ControllerError("horizon and plan_dt must be positive")
        steps = self.horizon / self.plan_dt
        if abs(steps - round(steps)) > 1e-9 or round(steps) < 1:
            raise ControllerError("horizon must be an integral number of plan_dt steps")
        weights = (
            (self.control_weight,)
            if np.isscalar(self.control_weight)
            else tuple(self.control_weight)
        )
        if any(w <= 0 for w in weights):
            raise ControllerError("control weights must be positive")
        if self.metric_weight is not None and self.metric_weight <= 0:
            raise ControllerError("metric weight must be positive")
        if self.replan_period < 1:
            raise ControllerError("replan_period must be >= 1")
        if self.staleness_window < 0:
            raise ControllerError("staleness window must be nonnegative")

    @property
    def steps(self) -> int:
        return round(self.horizon / self.plan_dt)

    def rinv_diag(self, control_dim: int) -> np.ndarray:
        if np.isscalar(self.control_weight):
            return np.full(control_dim, 1.0 / float(self.control_weight))
        w = np.asarray(self.control_weight, dtype=np.float64)
        if w.shape != (control_dim,):
            raise ControllerError(
                f"control_weight has {w.shape[0]} entries for a {control_dim}-channel model"
            )
        return 1.0 / w


@dataclass(frozen=True)
class PeerSpectrum:
    """A peer's shared statistics as last received."""

    coeffs: np.ndarray
    elapsed: float
    received_at: float


@dataclass(frozen=True, eq=False)
class ErgodicMemory:
    """Running own statistics plus the latest peer spectra.

    Single-writer: the owning agent updates it; snapshots are safe to hand
    to concurrent planners.
    """

    config: SpectralConfig
    coeffs: np.ndarray
    elapsed: float
    peers: Mapping[str, PeerSpectrum]


def fresh_memory(cfg: SpectralConfig) -> ErgodicMemory:
    return ErgodicMemory(cfg, np.zeros(cfg.size), 0.0, {})


def accumulate_own(mem: ErgodicMemory, point, dt: float) -> ErgodicMemory:
    """Fold one dwell interval at the given exploration-space point into the
    running average."""
    if dt <= 0:
        raise ControllerError("dt must be positive")
    pt = np.asarray(point, dtype=np.float64)
    if pt.shape != (mem.config.dims,) or not np.isfinite(pt).all():
        raise ControllerError("sample point must be finite with one entry per dimension")
    pts = np.ascontiguousarray(mem.config.clamp_points(pt)[None, :])
    row = _kernels.basis_block(pts, mem.config.freq_table, mem.config.hinv_table)[0]
    t = mem.elapsed
    coeffs = (t * mem.coeffs + dt * row) / (t + dt)
    return replace(mem, coeffs=coeffs, elapsed=t + dt)


def record_peer(
    mem: ErgodicMemory,
    peer_id: str,
    coeffs,
    peer_elapsed: float,
    received_at: float | None = None,
) -> ErgodicMemory:
    """Store (or refresh) a peer's shared spectrum."""
    c = np.asarray(coeffs, dtype=np.float64)
    if c.shape != (mem.config.size,):
        raise ControllerError("peer spectrum has the wrong number of coefficients")
    at = mem.elapsed if received_at is None else float(received_at)
    peers = dict(mem.peers)
    peers[peer_id] = PeerSpectrum(c, float(peer_elapsed), at)
    return replace(mem, peers=peers)


def _fused(mem: ErgodicMemory, window: float) -> tuple[np.ndarray, int]:
    """Duration-weighted average of own + fresh peer spectra, and the count."""
    entries = [(mem.elapsed, mem.coeffs)]
    for peer_id in sorted(mem.peers):
        p = mem.peers[peer_id]
        if mem.elapsed - p.received_at <= window:
            entries.append((p.elapsed, p.coeffs))
    if len(entries) == 1:
        return mem.coeffs, 1
    total = sum(t for t, _ in entries)
    if total <= 0:
        return sum(c for _, c in entries) / len(entries), len(entries)
    out = np.zeros_like(mem.coeffs)
    for t, c in entries:
        out += (t / total) * c
    return out, len(entries)


def fuse_spectra(mem: ErgodicMemory, window: float = 5.0) -> Spectrum:
    """Collective statistics as this agent currently sees them.

    Peer entries older than the staleness window are ignored; an isolated
    agent gets exactly its own statistics back, so it plans as a solo unit.
    """
    coeffs, _ = _fused(mem, window)
    return Spectrum(mem.config, coeffs)


class Plan(NamedTuple):
    controls: np.ndarray  # (steps, control_dim), clamped to model bounds
    path: np.ndarray  # (steps + 1, state_dim), forward-integrated under controls


def _zero_rollout(model: AgentModel, x0: np.ndarray, steps: int, dt: float) -> np.ndarray:
    """Nominal trajectory under zero control.

    The drift-free kinds hold still, so the rollout is the start state
    repeated; only the double integrator actually coasts.
    """
    if model.kind != DOUBLE_INTEGRATOR:
        return np.tile(x0, (steps + 1, 1))
    xs = np.empty((steps + 1, model.state_dim))
    xs[0] = x0
    u0 = np.zeros(model.control_dim)
    for l in range(steps):
        xs[l + 1] = step_unclamped_control(model, xs[l], u0, dt)
    return xs


def _blended_coeffs(
    model: AgentModel,
    xs: np.ndarray,
    mem: ErgodicMemory,
    params: PlannerParams,
) -> tuple[np.ndarray, np.ndarray, int]:
    """Blend fused memory with the rollout's predicted contribution.

    Returns (blended coefficients, rollout sample positions, fused count).
    The blend weighs each side by its duration, so the rollout matters a lot
    early in a mission and progressively less as history accumulates.
    """
    cfg = mem.config
    steps = xs.shape[0] - 1
    horizon = steps * params.plan_dt
    pos = np.ascontiguousarray(
        cfg.clamp_points(xs[:steps, list(model.position_idx)])
    )
    c_roll = _kernels.traj_coeffs(pos, cfg.freq_table, cfg.hinv_table)
    fused, n_fused = _fused(mem, params.staleness_window)
    te = mem.elapsed
    blended = (te * fused + horizon * c_roll) / (te + horizon)
    return blended, pos, n_fused


def _source_rows(
    model: AgentModel,
    pos: np.ndarray,
    coeff_weights: np.ndarray,
    cfg: SpectralConfig,
) -> np.ndarray:
    """Costate source at each rollout sample, embedded in state space."""
    grads = _kernels.weighted_grad_sum(
        pos, np.ascontiguousarray(coeff_weights), cfg.freq_table, cfg.hinv_table
    )
    rows = np.zeros((pos.shape[0], model.state_dim))
    rows[:, list(model.position_idx)] = grads
    return rows


def _costates(
    model: AgentModel,
    xs: np.ndarray,
    us: np.ndarray,
    source: np.ndarray,
    dt: float,
) -> np.ndarray:
    """Backward pass for the discrete rollout; returns p[l] for l = 0..steps.

    p[steps] = 0 (free endpoint); p[l] = dt * source[l] + (dPhi/dx)^T p[l+1].
    """
    steps = xs.shape[0] - 1
    p = np.zeros((steps + 1, model.state_dim))
    for l in range(steps - 1, -1, -1):
        d_dx, _ = step_jacobians(model, xs[l], us[l], dt)
        p[l] = dt * source[l] + d_dx.T @ p[l + 1]
        if not np.isfinite(p[l]).all():
            raise PlanDivergenceError(l)
    return p


def _costates_zero_nominal(
    model: AgentModel, xs: np.ndarray, source: np.ndarray, dt: float
) -> np.ndarray:
    """Backward pass along a zero-control nominal.

    For every model kind the step-map Jacobian is state-independent at zero
    control, so it is evaluated once; the recursion itself is unchanged.
    """
    steps = xs.shape[0] - 1
    d_dx, _ = step_jacobians(model, xs[0], np.zeros(model.control_dim), dt)
    d_dx_t = np.ascontiguousarray(d_dx.T)
    p = np.zeros((steps + 1, model.state_dim))
    for l in range(steps - 1, -1, -1):
        p[l] = dt * source[l] + d_dx_t @ p[l + 1]
    if not np.isfinite(p).all():
        bad = np.where(~np.isfinite(p).all(axis=1))[0]
        raise PlanDivergenceError(int(bad[0]))
    return p


def plan(
    model: AgentModel,
    x0: np.ndarray,
    mem: ErgodicMemory,
    phi: Spectrum,
    params: PlannerParams,
) -> Plan:
    """One receding-horizon plan from the current state and memory snapshot.

    The costate source is attenuated by the number of fused spectra: when
    many agents share statistics, each one is responsible for a matching
    share of the correction.
    """
    cfg = mem.config
    if phi.config != cfg:
        raise ControllerError("target spectrum config does not match memory config")
    x0 = np.asarray(x0, dtype=np.float64)
    if not np.isfinite(x0).all():
        raise ControllerError("initial state must be finite")
    dt = params.plan_dt
    steps = params.steps
    horizon = steps * dt
    q = cfg.metric_weight if params.metric_weight is None else params.metric_weight

    xs = _zero_rollout(model, x0, steps, dt)
    blended, pos, n_fused = _blended_coeffs(model, xs, mem, params)
    scale = 2.0 * q / (n_fused * (mem.elapsed + horizon))
    coeff_w = scale * cfg.lambda_table * (blended - phi.coeffs)
    source = _source_rows(model, pos, coeff_w, cfg)

    p = _costates_zero_nominal(model, xs, source, dt)

    rinv = params.rinv_diag(model.control_dim)
    # the input map is constant along a zero-control nominal (heading and
    # velocity structure do not change), so one evaluation serves all steps
    h = control_matrix(model, xs[0])
    lo = np.asarray(model.control_lo)
    hi = np.asarray(model.control_hi)
    controls = np.clip(-(p[1:] @ h) * rinv, lo, hi)

    path = np.empty_like(xs)
    path[0] = x0
    for l in range(steps):
        path[l + 1] = step_unclamped_control(model, path[l], controls[l], dt)
    return Plan(controls, path)


def horizon_cost(
    model: AgentModel,
    x0: np.ndarray,
    mem: ErgodicMemory,
    phi: Spectrum,
    params: PlannerParams,
    controls: np.ndarray,
) -> float:
    """Coverage cost of running the given control sequence over the horizon.

    This is the objective the costate differentiates: the weighted squared
    coefficient error of the duration-blended statistics at horizon end.
    """
    cfg = mem.config
    if phi.config != cfg:
        raise ControllerError("target spectrum config does not match memory config")
    controls = np.asarray(controls, dtype=np.float64)
    steps = params.steps
    if controls.shape != (steps, model.control_dim):
        raise ControllerError("control sequence shape does not match the horizon")
    dt = params.plan_dt
    xs = np.empty((steps + 1, model.state_dim))
    xs[0] = np.asarray(x0, dtype=np.float64)
    for l in range(steps):
        xs[l + 1] = step(model, xs[l], controls[l], dt)
    blended, _, _ = _blended_coeffs(model, xs, mem, params)
    q = cfg.metric_weight if params.metric_weight is None else params.metric_weight
    diff = blended - phi.coeffs
    return float(q * (cfg.lambda_table * diff * diff).sum())


def directional_cost_derivative(
    model: AgentModel,
    x0: np.ndarray,
    mem: ErgodicMemory,
    phi: Spectrum,
    params: PlannerParams,
    perturbation: np.ndarray,
) -> float:
    """Derivative of horizon_cost along a control perturbation at the nominal.

    Computed from the costate of the zero-control rollout; matches central
    finite differences of horizon_cost. Unlike plan, the source here is not
    attenuated by the fused count, because the cost being differentiated is
    the single-agent horizon objective.
    """
    cfg = mem.config
    if phi.config != cfg:
        raise ControllerError("target spectrum config does not match memory config")
    v = np.asarray(perturbation, dtype=np.float64)
    steps = params.steps
    if v.shape != (steps, model.control_dim):
        raise ControllerError("perturbation shape does not match the horizon")
    dt = params.plan_dt
    horizon = steps * dt
    q = cfg.metric_weight if params.metric_weight is None else params.metric_weight

    xs = _zero_rollout(model, np.asarray(x0, dtype=np.float64), steps, dt)
    blended, pos, _ = _blended_coeffs(model, xs, mem, params)
    scale = 2.0 * q / (mem.elapsed + horizon)
    coeff_w = scale * cfg.lambda_table * (blended - phi.coeffs)
    source = _source_rows(model, pos, coeff_w, cfg)

    us0 = np.zeros((steps, model.control_dim))
    p = _costates(model, xs, us0, source, dt)

    total = 0.0
    for l in range(steps):
        _, d_du = step_jacobians(model, xs[l], us0[l], dt)
        total += float(v[l] @ (d_du.T @ p[l + 1]))
    return total
