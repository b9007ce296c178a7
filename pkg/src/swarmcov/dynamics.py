"""Control-affine agent models and their integration/linearization.

Three model kinds cover the simulated platforms: a velocity-controlled point
(single integrator), an acceleration-controlled point (double integrator),
and a kinematic unicycle (differential drive). States live in the normalized
workspace: position components are clamped to the unit box after each step.

The vector field is f(x, u) = drift(x) + control_matrix(x) @ u. step()
advances it with fixed-step RK4; step_jacobians() returns the exact
derivatives of that discrete step map, which the planner's backward pass
relies on.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SINGLE_INTEGRATOR = "single-integrator"
DOUBLE_INTEGRATOR = "double-integrator"
DIFFERENTIAL_DRIVE = "differential-drive"

MODEL_KINDS = (SINGLE_INTEGRATOR, DOUBLE_INTEGRATOR, DIFFERENTIAL_DRIVE)

# unit-workspace traversal in ~5 s at full speed
DEFAULT_SPEED_BOUND = 0.2
DEFAULT_TURN_BOUND = 1.5


class DynamicsError(ValueError):
    """Contract violation in a dynamics operation."""


@dataclass(frozen=True)
class AgentModel:
    """Shape and bounds of one agent's dynamics.

    position_idx names the state components that live in the exploration
    space (what the coverage statistics see).
    """

    kind: str
    state_dim: int
    control_dim: int
    control_lo: tuple[float, ...]
    control_hi: tuple[float, ...]
    position_idx: tuple[int, ...] = (0, 1)

    def __post_init__(self):
        if self.kind not in MODEL_KINDS:
            raise DynamicsError(f"unknown model kind {self.kind!r}")
        if len(self.control_lo) != self.control_dim or len(self.control_hi) != self.control_dim:
            raise DynamicsError("control bounds must match control_dim")
        for lo, hi in zip(self.control_lo, self.control_hi):
            if not (np.isfinite(lo) and np.isfinite(hi) and lo < hi):
                raise DynamicsError("control bounds must be finite with lo < hi")
        if len(set(self.position_idx)) != len(self.position_idx):
            raise DynamicsError("position indices must be distinct")
        if any(i < 0 or i >= self.state_dim for i in self.position_idx):
            raise DynamicsError("position indices must address state components")

    def clamp_control(self, u: np.ndarray) -> np.ndarray:
        return np.clip(u, self.control_lo, self.control_hi)

    def initial_state(self, position, heading: float = 0.0) -> np.ndarray:
        """State vector at rest at the given unit-workspace position."""
        x = np.zeros(self.state_dim)
        x[list(self.position_idx)] = np.asarray(position, dtype=np.float64)
        if self.kind == DIFFERENTIAL_DRIVE:
            x[2] = heading
        return x


def single_integrator(speed: float = DEFAULT_SPEED_BOUND) -> AgentModel:
    return AgentModel(SINGLE_INTEGRATOR, 2, 2, (-speed, -speed), (speed, speed))


def double_integrator(accel: float = DEFAULT_SPEED_BOUND) -> AgentModel:
    return AgentModel(DOUBLE_INTEGRATOR, 4, 2, (-accel, -accel), (accel, accel))


def differential_drive(
    speed: float = DEFAULT_SPEED_BOUND, turn: float = DEFAULT_TURN_BOUND
) -> AgentModel:
    return AgentModel(DIFFERENTIAL_DRIVE, 3, 2, (-speed, -turn), (speed, turn))


def model_from_kind(kind: str) -> AgentModel:
    """Model with default bounds for a scenario-file kind string."""
    factory = {
        SINGLE_INTEGRATOR: single_integrator,
        DOUBLE_INTEGRATOR: double_integrator,
        DIFFERENTIAL_DRIVE: differential_drive,
    }.get(kind)
    if factory is None:
        raise DynamicsError(f"unknown model kind {kind!r}")
    return factory()


def drift(model: AgentModel, x: np.ndarray) -> np.ndarray:
    """Unactuated part of the vector field."""
    x = _check_state(model, x)
    if model.kind == DOUBLE_INTEGRATOR:
        return np.array([x[2], x[3], 0.0, 0.0])
    return np.zeros(model.state_dim)


def control_matrix(model: AgentModel, x: np.ndarray) -> np.ndarray:
    """Input map h(x), shape (state_dim, control_dim)."""
    x = _check_state(model, x)
    if model.kind == SINGLE_INTEGRATOR:
        return np.eye(2)
    if model.kind == DOUBLE_INTEGRATOR:
        return np.array([[0.0, 0.0], [0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    theta = x[2]
    return np.array([[np.cos(theta), 0.0], [np.sin(theta), 0.0], [0.0, 1.0]])


def vector_field(model: AgentModel, x: np.ndarray, u: np.ndarray) -> np.ndarray:
    return drift(model, x) + control_matrix(model, x) @ u


def dynamics_jacobian(model: AgentModel, x: np.ndarray, u: np.ndarray) -> np.ndarray:
    """State Jacobian of the vector field at (x, u)."""
    x = _check_state(model, x)
    u = np.asarray(u, dtype=np.float64)
    n = model.state_dim
    J = np.zeros((n, n))
    if model.kind == DOUBLE_INTEGRATOR:
        J[0, 2] = 1.0
        J[1, 3] = 1.0
    elif model.kind == DIFFERENTIAL_DRIVE:
        theta = x[2]
        J[0, 2] = -np.sin(theta) * u[0]
        J[1, 2] = np.cos(theta) * u[0]
    return J


def step(model: AgentModel, x: np.ndarray, u: np.ndarray, dt: float) -> np.ndarray:
    """One fixed-dt integration step.

    The control is clamped to the model bounds first and position components
    are clamped to the unit box afterwards. The update is the RK4 map of the
    vector field; for the integrator kinds RK4 collapses to an exact closed
    form, which is what gets evaluated.
    """
    if dt <= 0:
        raise DynamicsError("dt must be positive")
    x = _check_state(model, x)
    u = np.asarray(u, dtype=np.float64)
    if u.shape != (model.control_dim,) or not np.isfinite(u).all():
        raise DynamicsError("control must be a finite vector of control_dim entries")
    return step_unclamped_control(model, x, model.clamp_control(u), dt)


def step_unclamped_control(
    model: AgentModel, x: np.ndarray, u: np.ndarray, dt: float
) -> np.ndarray:
    """RK4 update without validation or control clamping (planner hot path)."""
    if model.kind == SINGLE_INTEGRATOR:
        out = x + dt * u
        return np.clip(out, 0.0, 1.0)
    if model.kind == DOUBLE_INTEGRATOR:
        # RK4 is exact for this linear chain
        out = np.array(
            [
                x[0] + dt * x[2] + 0.5 * dt * dt * u[0],
                x[1] + dt * x[3] + 0.5 * dt * dt * u[1],
                x[2] + dt * u[0],
                x[3] + dt * u[1],
            ]
        )
        out[:2] = np.clip(out[:2], 0.0, 1.0)
        return out
    # differential drive: staged RK4 (heading enters nonlinearly)
    s, w = u[0], u[1]
    th = x[2]
    k1x, k1y = s * np.cos(th), s * np.sin(th)
    th2 = th + 0.5 * dt * w
    k2x, k2y = s * np.cos(th2), s * np.sin(th2)  # k3 coincides with k2
    th4 = th + dt * w
    k4x, k4y = s * np.cos(th4), s * np.sin(th4)
    out = np.array(
        [
            x[0] + (dt / 6.0) * (k1x + 4.0 * k2x + k4x),
            x[1] + (dt / 6.0) * (k1y + 4.0 * k2y + k4y),
            th + dt * w,
        ]
    )
    out[:2] = np.clip(out[:2], 0.0, 1.0)
    return out


def step_jacobians(
    model: AgentModel, x: np.ndarray, u: np.ndarray, dt: float
) -> tuple[np.ndarray, np.ndarray]:
    """Exact derivatives (d_next/dx, d_next/du) of the RK4 step map.

    Valid away from the active position clamp and control saturation; the
    planner only differentiates interior nominal rollouts.
    """
    x = _check_state(model, x)
    u = np.asarray(u, dtype=np.float64)
    n = model.state_dim
    eye = np.eye(n)

    x1 = x
    k1 = vector_field(model, x1, u)
    x2 = x + 0.5 * dt * k1
    k2 = vector_field(model, x2, u)
    x3 = x + 0.5 * dt * k2
    k3 = vector_field(model, x3, u)
    x4 = x + dt * k3

    A1 = dynamics_jacobian(model, x1, u)
    A2 = dynamics_jacobian(model, x2, u)
    A3 = dynamics_jacobian(model, x3, u)
    A4 = dynamics_jacobian(model, x4, u)
    B1 = control_matrix(model, x1)
    B2 = control_matrix(model, x2)
    B3 = control_matrix(model, x3)
    B4 = control_matrix(model, x4)

    dk1_dx = A1
    dk2_dx = A2 @ (eye + 0.5 * dt * dk1_dx)
    dk3_dx = A3 @ (eye + 0.5 * dt * dk2_dx)
    dk4_dx = A4 @ (eye + dt * dk3_dx)
    d_dx = eye + (dt / 6.0) * (dk1_dx + 2.0 * dk2_dx + 2.0 * dk3_dx + dk4_dx)

    dk1_du = B1
    dk2_du = A2 @ (0.5 * dt * dk1_du) + B2
    dk3_du = A3 @ (0.5 * dt * dk2_du) + B3
    dk4_du = A4 @ (dt * dk3_du) + B4
    d_du = (dt / 6.0) * (dk1_du + 2.0 * dk2_du + 2.0 * dk3_du + dk4_du)

    return d_dx, d_du


def project_position(model: AgentModel, x: np.ndarray) -> np.ndarray:
    """Exploration-space position components of a state."""
    return np.asarray(x, dtype=np.float64)[list(model.position_idx)]


def _check_state(model: AgentModel, x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (model.state_dim,):
        raise DynamicsError(
            f"state must have {model.state_dim} entries for {model.kind}, got {x.shape}"
        )
    if not np.isfinite(x).all():
        raise DynamicsError("state must be finite")
    return x
