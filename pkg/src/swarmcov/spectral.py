"""Cosine-basis spectral machinery over the rectangular workspace.

Everything the coverage stack needs from Fourier space lives here: basis
evaluation and gradients, coefficient weights, decomposition of densities
and trajectories into coefficient vectors ("spectra"), the coverage-error
metric between two spectra, and grid reconstruction for display.

Basis convention: multi-indices k range over {0..K-1}^v, the constant term
included. Each basis function is a product of axis cosines scaled so its
squared integral over the domain box is one; a normalized density therefore
always has leading coefficient 1, which the tests lean on.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from itertools import product
from typing import Sequence

import numpy as np

from swarmcov import _kernels


class SpectralError(ValueError):
    """Contract violation in spectral-space operations."""


@dataclass(frozen=True)
class SpectralConfig:
    """Shared parameters for one family of spectra.

    num_coeffs: coefficients per exploration dimension (index set is
        {0..num_coeffs-1}^dims, so spectra have num_coeffs**dims entries).
    dims: dimensionality of the exploration space.
    lengths: side lengths of the domain box (unit box after workspace
        normalization).
    metric_weight: scalar weight applied to the coverage-error metric.
    """

    num_coeffs: int = 10
    dims: int = 2
    lengths: tuple[float, ...] = (1.0, 1.0)
    metric_weight: float = 1.0

    def __post_init__(self):
        if self.num_coeffs < 1:
            raise SpectralError("num_coeffs must be >= 1")
        if self.dims < 1:
            raise SpectralError("dims must be >= 1")
        if len(self.lengths) != self.dims:
            raise SpectralError("lengths must have one entry per dimension")
        if any(L <= 0 for L in self.lengths):
            raise SpectralError("domain lengths must be positive")
        if self.metric_weight <= 0:
            raise SpectralError("metric_weight must be positive")

    @property
    def size(self) -> int:
        return self.num_coeffs**self.dims

    @cached_property
    def index_table(self) -> np.ndarray:
        """All multi-indices in C order, shape (size, dims), int64."""
        idx = np.array(list(product(range(self.num_coeffs), repeat=self.dims)))
        idx.setflags(write=False)
        return idx

    @cached_property
    def freq_table(self) -> np.ndarray:
        """Angular factors k_d * pi / L_d, shape (size, dims)."""
        f = self.index_table * np.pi / np.asarray(self.lengths)
        f = np.ascontiguousarray(f, dtype=np.float64)
        f.setflags(write=False)
        return f

    @cached_property
    def hinv_table(self) -> np.ndarray:
        """Reciprocal normalizations 1/h_k, shape (size,)."""
        L = np.asarray(self.lengths)
        factors = np.where(self.index_table == 0, L, L / 2.0)
        h = np.sqrt(factors.prod(axis=1))
        out = np.ascontiguousarray(1.0 / h)
        out.setflags(write=False)
        return out

    @cached_property
    def lambda_table(self) -> np.ndarray:
        """Frequency weights (1 + |k|^2)^(-(dims+1)/2), shape (size,)."""
        ksq = (self.index_table**2).sum(axis=1)
        out = (1.0 + ksq) ** (-(self.dims + 1) / 2.0)
        out.setflags(write=False)
        return out

    def flat_index(self, k: Sequence[int]) -> int:
        k = self._check_index(k)
        idx = 0
        for ki in k:
            idx = idx * self.num_coeffs + int(ki)
        return idx

    def _check_index(self, k: Sequence[int]) -> np.ndarray:
        k = np.asarray(k, dtype=np.int64)
        if k.shape != (self.dims,):
            raise SpectralError(f"multi-index must have {self.dims} entries, got {k.shape}")
        if (k < 0).any() or (k >= self.num_coeffs).any():
            raise SpectralError(f"multi-index {k.tolist()} outside 0..{self.num_coeffs - 1}")
        return k

    def clamp_points(self, points: np.ndarray) -> np.ndarray:
        """Clamp points to the domain box (guards float drift at walls)."""
        lo = np.zeros(self.dims)
        hi = np.asarray(self.lengths)
        return np.clip(points, lo, hi)


@dataclass(frozen=True, eq=False)
class Spectrum:
    """A coefficient vector under a given config."""

    config: SpectralConfig
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.ascontiguousarray(self.coeffs, dtype=np.float64)
        if c.shape != (self.config.size,):
            raise SpectralError(
                f"spectrum must have {self.config.size} coefficients, got {c.shape}"
            )
        if not np.isfinite(c).all():
            raise SpectralError("spectrum coefficients must be finite")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    def __getitem__(self, k: Sequence[int]) -> float:
        return float(self.coeffs[self.config.flat_index(k)])


@dataclass(frozen=True, eq=False)
class DensityGrid:
    """Nonnegative density sampled on a regular grid over the domain box.

    values[i, j, ...] is the density at the cell with index i along the
    first axis, j along the second, and so on; cell centers sit at
    (i + 0.5) * L_d / resolution_d.
    """

    values: np.ndarray
    lengths: tuple[float, ...] = (1.0, 1.0)

    def __post_init__(self):
        v = np.ascontiguousarray(self.values, dtype=np.float64)
        if v.ndim != len(self.lengths):
            raise SpectralError("grid rank must match number of domain lengths")
        if v.size == 0:
            raise SpectralError("grid must have at least one cell")
        if (v < 0).any():
            raise SpectralError("density values must be nonnegative")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def resolution(self) -> tuple[int, ...]:
        return self.values.shape

    @property
    def cell_measure(self) -> float:
        m = 1.0
        for L, n in zip(self.lengths, self.values.shape):
            m *= L / n
        return m

    @property
    def mass(self) -> float:
        return float(self.values.sum() * self.cell_measure)

    def is_normalized(self, tol: float = 1e-6) -> bool:
        return abs(self.mass - 1.0) <= tol

    def normalized(self) -> "DensityGrid":
        m = self.mass
        if m <= 0:
            raise SpectralError("cannot normalize a zero-mass grid")
        return DensityGrid(self.values / m, self.lengths)

    @cached_property
    def centers(self) -> np.ndarray:
        """Cell centers flattened in C order, shape (n_cells, dims)."""
        axes = [
            (np.arange(n) + 0.5) * (L / n)
            for L, n in zip(self.lengths, self.values.shape)
        ]
        mesh = np.meshgrid(*axes, indexing="ij")
        pts = np.ascontiguousarray(np.stack([m.ravel() for m in mesh], axis=1))
        pts.setflags(write=False)
        return pts


def uniform_grid(resolution: int | tuple[int, ...], cfg: SpectralConfig) -> DensityGrid:
    """Normalized uniform density on the config's domain box."""
    res = _resolution_tuple(resolution, cfg.dims)
    volume = float(np.prod(cfg.lengths))
    return DensityGrid(np.full(res, 1.0 / volume), cfg.lengths)


def uniform_spectrum(cfg: SpectralConfig) -> Spectrum:
    """Exact spectrum of the uniform density (leading coefficient only)."""
    coeffs = np.zeros(cfg.size)
    # only the constant basis function has nonzero integral: 1/h_0
    coeffs[0] = float(cfg.hinv_table[0])
    return Spectrum(cfg, coeffs)


def _resolution_tuple(resolution, dims: int) -> tuple[int, ...]:
    if np.isscalar(resolution):
        res = (int(resolution),) * dims
    else:
        res = tuple(int(r) for r in resolution)
    if len(res) != dims or any(r < 1 for r in res):
        raise SpectralError(f"invalid grid resolution {resolution!r}")
    return res


def _as_points(x, cfg: SpectralConfig) -> np.ndarray:
    pts = np.asarray(x, dtype=np.float64)
    if pts.ndim == 1:
        pts = pts[None, :]
    if pts.ndim != 2 or pts.shape[1] != cfg.dims:
        raise SpectralError(f"points must have {cfg.dims} coordinates")
    if not np.isfinite(pts).all():
        raise SpectralError("points must be finite")
    return np.ascontiguousarray(cfg.clamp_points(pts))


def basis_eval(k: Sequence[int], x, cfg: SpectralConfig) -> float:
    """One basis function at one point."""
    idx = cfg.flat_index(k)
    pts = _as_points(x, cfg)
    row = _kernels.basis_block(pts, cfg.freq_table, cfg.hinv_table)
    return float(row[0, idx])


def basis_grad(k: Sequence[int], x, cfg: SpectralConfig) -> np.ndarray:
    """Spatial gradient of one basis function at one point, shape (dims,)."""
    idx = cfg.flat_index(k)
    pts = _as_points(x, cfg)
    g = _kernels.basis_grad_block(pts, cfg.freq_table, cfg.hinv_table)
    return np.array(g[0, idx, :])


def normalizer(k: Sequence[int], cfg: SpectralConfig) -> float:
    """The scaling h_k that makes the basis function unit-norm."""
    idx = cfg.flat_index(k)
    return float(1.0 / cfg.hinv_table[idx])


def lambda_weight(k: Sequence[int], cfg: SpectralConfig) -> float:
    """Frequency weight for one coefficient, in (0, 1]."""
    idx = cfg.flat_index(k)
    return float(cfg.lambda_table[idx])


def basis_matrix(points: np.ndarray, cfg: SpectralConfig) -> np.ndarray:
    """Basis values for all coefficients at many points, shape (P, size)."""
    pts = _as_points(points, cfg)
    return _kernels.basis_block(pts, cfg.freq_table, cfg.hinv_table)


def decompose_density(grid: DensityGrid, cfg: SpectralConfig) -> Spectrum:
    """Project a normalized density grid onto the basis (midpoint quadrature)."""
    if tuple(grid.lengths) != tuple(cfg.lengths):
        raise SpectralError("grid domain does not match spectral config")
    if not grid.is_normalized():
        raise SpectralError(
            f"grid mass is {grid.mass:.6g}; normalize before decomposing"
        )
    F = _kernels.basis_block(grid.centers, cfg.freq_table, cfg.hinv_table)
    coeffs = F.T @ (grid.values.ravel() * grid.cell_measure)
    return Spectrum(cfg, coeffs)


def trajectory_spectrum(points, dt: float, cfg: SpectralConfig) -> Spectrum:
    """Time-average basis statistics of a sampled trajectory.

    points are the left endpoints of equal dt intervals; the average is the
    left-Riemann integral over the total duration len(points) * dt.
    """
    if dt <= 0:
        raise SpectralError("sample spacing dt must be positive")
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[0] < 1 or pts.shape[1] != cfg.dims:
        raise SpectralError("trajectory must be a nonempty (n, dims) array")
    if not np.isfinite(pts).all():
        raise SpectralError("trajectory samples must be finite")
    pts = np.ascontiguousarray(cfg.clamp_points(pts))
    coeffs = _kernels.traj_coeffs(pts, cfg.freq_table, cfg.hinv_table)
    return Spectrum(cfg, coeffs)


def ergodic_metric(c: Spectrum, phi: Spectrum) -> float:
    """Weighted squared coefficient error between trajectory and target."""
    if c.config != phi.config:
        raise SpectralError("spectra built under different configs")
    cfg = c.config
    diff = c.coeffs - phi.coeffs
    return float(cfg.metric_weight * (cfg.lambda_table * diff * diff).sum())


def reconstruct(s: Spectrum, resolution: int | tuple[int, ...]) -> DensityGrid:
    """Evaluate the basis expansion at grid cell centers.

    The result may ring below zero; use reconstruct_display for a clipped,
    renormalized variant suitable for heatmaps.
    """
    cfg = s.config
    res = _resolution_tuple(resolution, cfg.dims)
    axes = [(np.arange(n) + 0.5) * (L / n) for L, n in zip(cfg.lengths, res)]
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.ascontiguousarray(np.stack([m.ravel() for m in mesh], axis=1))
    F = _kernels.basis_block(pts, cfg.freq_table, cfg.hinv_table)
    values = (F @ s.coeffs).reshape(res)
    return _raw_grid(values, tuple(cfg.lengths))


def _raw_grid(values: np.ndarray, lengths: tuple[float, ...]) -> DensityGrid:
    # construction path for reconstructions, which may ring below zero and
    # are exempt from the nonnegativity invariant
    grid = object.__new__(DensityGrid)
    values = np.ascontiguousarray(values, dtype=np.float64)
    values.setflags(write=False)
    object.__setattr__(grid, "values", values)
    object.__setattr__(grid, "lengths", lengths)
    return grid


def reconstruct_display(s: Spectrum, resolution: int | tuple[int, ...]) -> DensityGrid:
    """Clipped-to-nonnegative, renormalized reconstruction for display."""
    raw = reconstruct(s, resolution)
    clipped = np.clip(raw.values, 0.0, None)
    grid = DensityGrid(clipped, raw.lengths)
    return grid.normalized() if grid.mass > 0 else grid
