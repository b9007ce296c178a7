"""Declarative task state compiled into target densities.

A TaskSpec records what the swarm currently cares about: attraction points
(discovered objects to secure), repulsion points (hazards to avoid), user
region commands, and the agent's role. compile_density turns it into a
normalized DensityGrid by mixing per-source layers:

  * attraction layer: weighted sum of tight Gaussians at the object points
  * repulsion layer: weighted sum of inverted Gaussians (holes) at hazards
  * user layer: full priority at the commanded cells, faint uniform noise
    everywhere else so the rest of the workspace keeps minimal coverage

Blocker-role agents treat hazards as attraction so they converge on them;
all other layers are unaffected by role.

TaskSpec values are immutable; every update returns a new value, so specs
can be snapshotted and handed to concurrent planners.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from swarmcov.spectral import DensityGrid

ROLE_REGULAR = "regular"
ROLE_BLOCKER = "dd_blocker"

KIND_ATTRACT = "EE"
KIND_REPEL = "DD"

# two points closer than this are the same discovery
DUPLICATE_TOL = 1e-6


class TaskSpecError(ValueError):
    """Invalid task state or update."""


Point = tuple[float, float]


@dataclass(frozen=True)
class TaskSpec:
    ee_points: tuple[Point, ...] = ()
    dd_points: tuple[Point, ...] = ()
    user_commands: tuple[tuple[Point, ...], ...] = ()
    user_seed: int = 0
    accumulate_commands: bool = False
    gaussian_cov: tuple[float, float] = (0.01, 0.01)
    noise_bound: float = 1e-3
    role: str = ROLE_REGULAR

    def __post_init__(self):
        for p in self.ee_points + self.dd_points:
            _check_unit_point(p)
        for cmd in self.user_commands:
            for p in cmd:
                _check_unit_point(p)
        if any(s <= 0 for s in self.gaussian_cov):
            raise TaskSpecError("gaussian covariance diagonal must be positive")
        if self.noise_bound <= 0:
            raise TaskSpecError("noise bound must be positive")
        if self.role not in (ROLE_REGULAR, ROLE_BLOCKER):
            raise TaskSpecError(f"unknown role {self.role!r}")

    @property
    def ee_weights(self) -> tuple[float, ...]:
        n = len(self.ee_points)
        return (1.0 / n,) * n if n else ()

    @property
    def dd_weights(self) -> tuple[float, ...]:
        n = len(self.dd_points)
        return (1.0 / n,) * n if n else ()

    def is_empty(self) -> bool:
        return not (self.ee_points or self.dd_points or self.user_commands)


def _check_unit_point(p) -> Point:
    if len(p) != 2:
        raise TaskSpecError(f"point {p!r} must have 2 coordinates")
    x, y = float(p[0]), float(p[1])
    if not (np.isfinite(x) and np.isfinite(y)):
        raise TaskSpecError(f"point {p!r} must be finite")
    if not (0.0 <= x <= 1.0 and 0.0 <= y <= 1.0):
        raise TaskSpecError(f"point {p!r} outside the unit workspace")
    return (x, y)


def register_discovery(spec: TaskSpec, kind: str, location) -> TaskSpec:
    """Add a discovered object; weights rebalance to stay uniform.

    Re-registering a location already present (within DUPLICATE_TOL) is a
    no-op, so repeated broadcasts are harmless.
    """
    loc = _check_unit_point(location)
    if kind == KIND_ATTRACT:
        points, field_name = spec.ee_points, "ee_points"
    elif kind == KIND_REPEL:
        points, field_name = spec.dd_points, "dd_points"
    else:
        raise TaskSpecError(f"unknown discovery kind {kind!r}")
    if any(_close(loc, p) for p in points):
        return spec
    return replace(spec, **{field_name: points + (loc,)})


def remove_discovery(spec: TaskSpec, kind: str, location) -> TaskSpec:
    """Drop a previously registered object (used when an object changes kind)."""
    loc = _check_unit_point(location)
    if kind == KIND_ATTRACT:
        kept = tuple(p for p in spec.ee_points if not _close(loc, p))
        return replace(spec, ee_points=kept)
    if kind == KIND_REPEL:
        kept = tuple(p for p in spec.dd_points if not _close(loc, p))
        return replace(spec, dd_points=kept)
    raise TaskSpecError(f"unknown discovery kind {kind!r}")


def _close(a: Point, b: Point) -> bool:
    return abs(a[0] - b[0]) <= DUPLICATE_TOL and abs(a[1] - b[1]) <= DUPLICATE_TOL


def add_user_command(spec: TaskSpec, points, rng_seed: int) -> TaskSpec:
    """Install a user region command.

    By default the new command replaces any previous one (updated priorities
    supersede); with accumulate_commands set, commands pile up instead. The
    stored seed re-rolls the background noise on the next compile.
    """
    if len(points) == 0:
        raise TaskSpecError("user command must contain at least one point")
    checked = []
    for i, p in enumerate(points):
        try:
            checked.append(_check_unit_point(p))
        except TaskSpecError as exc:
            raise TaskSpecError(f"command point {i} rejected: {exc}") from exc
    new_cmd = (tuple(checked),)
    cmds = spec.user_commands + new_cmd if spec.accumulate_commands else new_cmd
    return replace(spec, user_commands=cmds, user_seed=int(rng_seed))


def compile_layers(spec: TaskSpec, resolution: int, rng_seed: int | None = None):
    """Per-source normalized layers on a resolution x resolution grid.

    Returns a dict with any of the keys "attract", "repel", "user"; each
    value is a unit-mass ndarray. Exposed separately so tests can assert
    layer independence.
    """
    if resolution < 1:
        raise TaskSpecError("grid resolution must be >= 1")
    n = int(resolution)
    cell = 1.0 / n
    ax = (np.arange(n) + 0.5) * cell
    gx, gy = np.meshgrid(ax, ax, indexing="ij")
    inv_var = (1.0 / spec.gaussian_cov[0], 1.0 / spec.gaussian_cov[1])

    def bump(points, weights):
        acc = np.zeros((n, n))
        for (px, py), w in zip(points, weights):
            d2 = (gx - px) ** 2 * inv_var[0] + (gy - py) ** 2 * inv_var[1]
            acc += w * np.exp(-0.5 * d2)
        return acc

    def hole(points, weights):
        acc = np.zeros((n, n))
        for (px, py), w in zip(points, weights):
            d2 = (gx - px) ** 2 * inv_var[0] + (gy - py) ** 2 * inv_var[1]
            acc += w * (1.0 - np.exp(-0.5 * d2))
        return acc

    layers: dict[str, np.ndarray] = {}
    attract_pts = list(spec.ee_points)
    attract_wts = list(spec.ee_weights)
    if spec.role == ROLE_BLOCKER and spec.dd_points:
        # blockers converge on hazards: hazards join the attraction layer
        attract_pts += list(spec.dd_points)
        attract_wts += list(spec.dd_weights)
        if spec.ee_points:
            total = len(attract_pts)
            attract_wts = [1.0 / total] * total
    if attract_pts:
        layers["attract"] = _unit_mass(bump(attract_pts, attract_wts), cell)
    if spec.dd_points and spec.role != ROLE_BLOCKER:
        layers["repel"] = _unit_mass(hole(spec.dd_points, spec.dd_weights), cell)
    if spec.user_commands:
        seed = spec.user_seed if rng_seed is None else rng_seed
        rng = np.random.default_rng(seed)
        user = rng.uniform(0.0, spec.noise_bound, size=(n, n))
        for cmd in spec.user_commands:
            for px, py in cmd:
                i = min(int(px * n), n - 1)
                j = min(int(py * n), n - 1)
                user[i, j] = 1.0
        layers["user"] = _unit_mass(user, cell)
    return layers


def _unit_mass(values: np.ndarray, cell: float) -> np.ndarray:
    total = values.sum() * cell * cell
    if total <= 0:
        raise TaskSpecError("layer has zero mass")
    return values / total


def compile_density(
    spec: TaskSpec, resolution: int = 50, rng_seed: int | None = None
) -> DensityGrid:
    """Mix the active layers into one normalized target density.

    Layers are mixed with equal weights so every active task stays visible;
    an empty spec compiles to the uniform density.
    """
    layers = compile_layers(spec, resolution, rng_seed)
    n = int(resolution)
    if not layers:
        return DensityGrid(np.ones((n, n)))
    mixed = sum(layers.values()) / len(layers)
    return DensityGrid(mixed).normalized()


@dataclass(frozen=True)
class WorkspaceTransform:
    """Affine map between world coordinates and the unit workspace."""

    min_corner: tuple[float, float]
    max_corner: tuple[float, float]

    def __post_init__(self):
        for lo, hi in zip(self.min_corner, self.max_corner):
            if not (np.isfinite(lo) and np.isfinite(hi)):
                raise TaskSpecError("workspace corners must be finite")
            if hi - lo <= 0:
                raise TaskSpecError("workspace box must have positive extent")

    @property
    def scale(self) -> np.ndarray:
        return np.asarray(self.max_corner, dtype=np.float64) - np.asarray(
            self.min_corner, dtype=np.float64
        )

    def world_to_unit(self, p) -> np.ndarray:
        """Map world points into unit coordinates (no clamping; caller decides)."""
        p = np.asarray(p, dtype=np.float64)
        if not np.isfinite(p).all():
            raise TaskSpecError("world point must be finite")
        return (p - np.asarray(self.min_corner)) / self.scale

    def unit_to_world(self, p) -> np.ndarray:
        p = np.asarray(p, dtype=np.float64)
        return np.asarray(self.min_corner) + p * self.scale


def world_to_unit(transform: WorkspaceTransform, p) -> np.ndarray:
    return transform.world_to_unit(p)


def unit_to_world(transform: WorkspaceTransform, p) -> np.ndarray:
    return transform.unit_to_world(p)
