#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure-numpy fallback.

Times the raw kernel entry points at the two workload shapes that matter
(a planning horizon batch and a full density-grid decomposition), then runs
one short scenario end to end under each backend in a subprocess.

Usage: python scripts/bench_kernels.py
"""

import os
import subprocess
import sys
import time

import numpy as np

from swarmcov import _kernels_py
from swarmcov.spectral import SpectralConfig

try:
    from swarmcov import _kernels_cy
except ImportError:
    _kernels_cy = None


def best_of(fn, repeats=200):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter_ns()
        fn()
        best = min(best, time.perf_counter_ns() - t0)
    return best / 1e3  # microseconds


def bench_kernels():
    cfg = SpectralConfig(num_coeffs=10)
    rng = np.random.default_rng(0)
    horizon_pts = np.ascontiguousarray(rng.random((20, 2)))
    grid_pts = np.ascontiguousarray(rng.random((2500, 2)))
    weights = np.ascontiguousarray(rng.normal(size=cfg.size))

    cases = [
        ("basis_block (20 pts)", lambda m: m.basis_block(horizon_pts, cfg.freq_table, cfg.hinv_table), 500),
        ("basis_block (2500 pts)", lambda m: m.basis_block(grid_pts, cfg.freq_table, cfg.hinv_table), 30),
        ("weighted_grad_sum (20 pts)", lambda m: m.weighted_grad_sum(horizon_pts, weights, cfg.freq_table, cfg.hinv_table), 500),
        ("traj_coeffs (2500 pts)", lambda m: m.traj_coeffs(grid_pts, cfg.freq_table, cfg.hinv_table), 30),
    ]
    backends = [("python", _kernels_py)]
    if _kernels_cy is not None:
        backends.append(("cython", _kernels_cy))

    print(f"{'kernel':34s}" + "".join(f"{name:>14s}" for name, _ in backends) + f"{'speedup':>10s}")
    for label, call, repeats in cases:
        times = [best_of(lambda m=mod: call(m), repeats) for _, mod in backends]
        row = f"{label:34s}" + "".join(f"{t:12.1f}us" for t in times)
        if len(times) == 2:
            row += f"{times[0] / times[1]:9.1f}x"
        print(row)


def bench_end_to_end():
    script = (
        "import time; t0=time.monotonic();"
        "from swarmcov.scenario import Scenario, AgentSpec;"
        "from swarmcov.harness import run;"
        "sc = Scenario(name='bench', seed=3, duration=30.0, agents=("
        "AgentSpec('r0', start=(0.3,0.3)), AgentSpec('r1', start=(0.7,0.6)),"
        "AgentSpec('r2', start=(0.2,0.8)), AgentSpec('r3', start=(0.8,0.2))));"
        "run(sc); print(f'{time.monotonic()-t0:.2f}')"
    )
    print()
    print("end-to-end: 30 s scenario, 4 agents, K=10")
    for label, env in (("cython", {}), ("python", {"SWARMCOV_PURE_PYTHON": "1"})):
        out = subprocess.run(
            [sys.executable, "-c", script],
            env={**os.environ, **env},
            capture_output=True,
            text=True,
        )
        print(f"  {label:8s} {out.stdout.strip()}s")


if __name__ == "__main__":
    bench_kernels()
    bench_end_to_end()
