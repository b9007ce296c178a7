"""Acceptance suite: one test per release criterion.

Each test enforces its stated tolerance and runtime budget and prints one
PASS line with the measured numbers (run with -s to see them inline).
Desk-scale scenarios reproduce the headline swarm behaviors: uniform
coverage, operator retargeting, hazard avoidance, object convergence, the
heterogeneous blocker, and robustness to agent loss and network partition.
"""

import time
from itertools import product

import numpy as np
import pytest

from swarmcov import controller as ctl
from swarmcov.dynamics import single_integrator
from swarmcov.harness import run, summarize, write_outputs
from swarmcov.scenario import AgentSpec, Scenario, ScenarioEvent
from swarmcov.spectral import (
    SpectralConfig,
    lambda_weight,
    normalizer,
    trajectory_spectrum,
    uniform_spectrum,
)
from swarmcov.swarmnet import NetModel

from oracles import collective_plan, normalizer_by_quadrature, pair_quadrature


def report(name, detail):
    print(f"[PASS] {name}: {detail}")


def spread_starts(seed, n=4):
    rng = np.random.default_rng(seed)
    return tuple(
        AgentSpec(f"r{i}", start=tuple(rng.uniform(0.1, 0.9, 2))) for i in range(n)
    )


FIXED_STARTS = (
    AgentSpec("r0", start=(0.3, 0.3)),
    AgentSpec("r1", start=(0.7, 0.6)),
    AgentSpec("r2", start=(0.2, 0.8)),
    AgentSpec("r3", start=(0.8, 0.2)),
)


def test_spectral_identities():
    t0 = time.monotonic()
    cfg = SpectralConfig(num_coeffs=5)
    worst_pair = 0.0
    for k in product(range(5), repeat=2):
        for kp in product(range(5), repeat=2):
            val = pair_quadrature(k, kp, cfg)
            expected = 1.0 if k == kp else 0.0
            worst_pair = max(worst_pair, abs(val - expected))
            assert abs(val - expected) <= 1e-4
    worst_h = 0.0
    for k in product(range(5), repeat=2):
        q = normalizer_by_quadrature(k)
        rel = abs(normalizer(k, cfg) - q) / q
        worst_h = max(worst_h, rel)
        assert rel < 1e-6
    assert lambda_weight((1, 1), cfg) == 3 ** (-1.5)
    elapsed = time.monotonic() - t0
    assert elapsed < 10.0
    report(
        "spectral identities",
        f"orthonormality worst {worst_pair:.2e}, normalizer worst rel {worst_h:.2e}, "
        f"weight(1,1) exact, {elapsed:.1f}s",
    )


def test_collective_averaging():
    t0 = time.monotonic()
    cfg = SpectralConfig(num_coeffs=10)
    rng = np.random.default_rng(11)
    parts = [rng.random((100, 2)) for _ in range(3)]
    joint = trajectory_spectrum(np.concatenate(parts), 0.1, cfg)
    mean = sum(trajectory_spectrum(p, 0.1, cfg).coeffs for p in parts) / 3
    worst = np.abs(joint.coeffs - mean).max()
    assert worst < 1e-12
    elapsed = time.monotonic() - t0
    assert elapsed < 1.0
    report("collective averaging", f"joint vs mean max abs diff {worst:.2e}, {elapsed:.2f}s")


def test_costate_derivative_matches_finite_differences():
    t0 = time.monotonic()
    cfg = SpectralConfig(num_coeffs=5)
    model = single_integrator()
    params = ctl.PlannerParams(horizon=1.0, plan_dt=0.1)
    rng = np.random.default_rng(21)
    mem = ctl.fresh_memory(cfg)
    x = np.array([0.3, 0.4])
    for _ in range(30):
        x = np.clip(x + rng.normal(0, 0.02, 2), 0, 1)
        mem = ctl.accumulate_own(mem, x, 0.1)
    phi = uniform_spectrum(cfg)
    x0 = np.array([0.52, 0.47])
    eps = 1e-5
    worst = 0.0
    for _ in range(20):
        v = rng.normal(0, 1, (params.steps, 2))
        adj = ctl.directional_cost_derivative(model, x0, mem, phi, params, v)
        cp = ctl.horizon_cost(model, x0, mem, phi, params, eps * v)
        cm = ctl.horizon_cost(model, x0, mem, phi, params, -eps * v)
        fd = (cp - cm) / (2 * eps)
        rel = abs(adj - fd) / max(1e-12, abs(fd))
        worst = max(worst, rel)
        assert rel < 1e-3
    elapsed = time.monotonic() - t0
    assert elapsed < 30.0
    report("costate vs finite differences", f"worst rel err {worst:.2e} over 20 draws, {elapsed:.1f}s")


def test_centralized_equals_decentralized():
    t0 = time.monotonic()
    cfg = SpectralConfig(num_coeffs=5)
    params = ctl.PlannerParams(horizon=1.0, plan_dt=0.1)
    rng = np.random.default_rng(31)
    models = [single_integrator() for _ in range(3)]
    starts = [m.initial_state(rng.uniform(0.2, 0.8, 2)) for m in models]
    own = [
        trajectory_spectrum(rng.random((40, 2)), 0.1, cfg).coeffs for _ in range(3)
    ]
    mems = []
    for j in range(3):
        mem = ctl.ErgodicMemory(cfg, own[j], 4.0, {})
        for i in range(3):
            if i != j:
                mem = ctl.record_peer(mem, f"a{i}", own[i], 4.0, received_at=4.0)
        mems.append(mem)
    phi = uniform_spectrum(cfg)
    stacked = [ctl.plan(models[j], starts[j], mems[j], phi, params).controls for j in range(3)]
    joint = collective_plan(list(zip(models, starts, mems)), phi, params)
    worst = max(np.abs(m - t).max() for m, t in zip(stacked, joint))
    assert worst < 1e-12
    elapsed = time.monotonic() - t0
    assert elapsed < 5.0
    report("centralized == decentralized", f"stacked vs block max diff {worst:.2e}, {elapsed:.1f}s")


def test_uniform_coverage_20_seeds():
    t0 = time.monotonic()
    hits = 0
    ratios = []
    for seed in range(20):
        sc = Scenario(
            name="coverage",
            seed=seed,
            duration=60.0,
            agents=spread_starts(seed),
            net=NetModel(topology="random", edge_prob=0.5, drop_prob=0.2),
        )
        _, _, fused = run(sc).metric_series()
        ratio = fused[-1] / fused[9]
        ratios.append(ratio)
        hits += ratio < 0.10
    elapsed = time.monotonic() - t0
    assert hits >= 19, f"only {hits}/20 seeds converged: {ratios}"
    assert elapsed < 120.0
    report(
        "uniform coverage",
        f"{hits}/20 seeds below 10% (worst ratio {max(ratios):.3f}), {elapsed:.0f}s",
    )


def test_user_command_retarget():
    t0 = time.monotonic()
    blob1 = [(0.25 + 0.02 * i, 0.71 + 0.02 * j) for i in range(5) for j in range(5)]
    blob2 = [(0.71 + 0.02 * i, 0.25 + 0.02 * j) for i in range(5) for j in range(5)]
    m1 = (0.29, 0.75)
    m2 = (0.75, 0.29)
    sc = Scenario(
        name="retarget",
        seed=2,
        duration=50.0,
        agents=FIXED_STARTS,
        events=(ScenarioEvent(time=20.0, kind="user_command", points=tuple(blob1 + blob2)),),
    )
    res = run(sc)
    near = total = 0
    for spec in sc.agents:
        pos = res.positions(spec.agent_id)[200:]
        d1 = np.hypot(pos[:, 0] - m1[0], pos[:, 1] - m1[1])
        d2 = np.hypot(pos[:, 0] - m2[0], pos[:, 1] - m2[1])
        near += ((d1 <= 0.15) | (d2 <= 0.15)).sum()
        total += pos.shape[0]
    frac = near / total
    elapsed = time.monotonic() - t0
    assert frac >= 0.60
    assert elapsed < 60.0
    report("user-command retarget", f"{frac:.1%} of post-command time near a mode, {elapsed:.0f}s")


def test_hazard_avoidance():
    t0 = time.monotonic()
    sc = Scenario(
        name="avoidance",
        seed=5,
        duration=60.0,
        agents=FIXED_STARTS,
        hidden_dds=((0.5, 0.5),),
    )
    res = run(sc)
    assert res.discovery_log, "hazard never discovered"
    disc = res.discovery_log[0]["tick"]
    grace = disc + 50  # five seconds after discovery
    near = total = 0
    for spec in sc.agents:
        pos = res.positions(spec.agent_id)[grace:]
        alive = res.alive_flags(spec.agent_id)[grace:].astype(bool)
        d = np.hypot(pos[:, 0] - 0.5, pos[:, 1] - 0.5)
        near += (d[alive] <= 0.1).sum()
        total += alive.sum()
    frac = near / total
    late_disablements = [e for e in res.disablements if e["tick"] >= grace]
    elapsed = time.monotonic() - t0
    assert frac < 0.02
    assert not res.disablements
    assert not late_disablements
    assert elapsed < 60.0
    report(
        "hazard avoidance",
        f"{frac:.2%} of post-grace agent-time within 0.1, 0 disablements, {elapsed:.0f}s",
    )


def test_object_convergence_persistent_motion():
    t0 = time.monotonic()
    sc = Scenario(
        name="convergence",
        seed=2,
        duration=60.0,
        agents=FIXED_STARTS,
        hidden_ees=((0.65, 0.4),),
    )
    res = run(sc)
    assert res.discovery_log, "object never discovered"
    disc = res.discovery_log[0]["tick"]
    near = total = 0
    moving_fracs = []
    for spec in sc.agents:
        pos = res.positions(spec.agent_id)
        d = np.hypot(pos[disc:, 0] - 0.65, pos[disc:, 1] - 0.4)
        near += (d <= 0.15).sum()
        total += d.size
        speed = np.linalg.norm(np.diff(pos, axis=0), axis=1) / sc.tick_dt
        moving_fracs.append((speed[disc:] > 0.01).mean())
    frac = near / total
    elapsed = time.monotonic() - t0
    assert frac >= 0.50
    assert min(moving_fracs) >= 0.90
    assert elapsed < 60.0
    report(
        "object convergence",
        f"{frac:.1%} of post-discovery time within 0.15, "
        f"worst moving fraction {min(moving_fracs):.1%}, {elapsed:.0f}s",
    )


def test_heterogeneous_blocker():
    t0 = time.monotonic()
    hazard = (0.6, 0.4)
    sc = Scenario(
        name="blocker",
        seed=5,
        duration=90.0,
        agents=(
            AgentSpec("b0", role="dd_blocker", start=(0.2, 0.2)),
            AgentSpec("r1", start=(0.7, 0.6)),
            AgentSpec("r2", start=(0.2, 0.8)),
            AgentSpec("r3", start=(0.8, 0.2)),
        ),
        hidden_dds=(hazard,),
    )
    res = run(sc)
    assert res.discovery_log
    disc = res.discovery_log[0]["tick"]
    pos_b = res.positions("b0")[disc:]
    mean_dist = np.hypot(pos_b[:, 0] - hazard[0], pos_b[:, 1] - hazard[1]).mean()
    regular_p5 = {}
    for aid in ("r1", "r2", "r3"):
        pos = res.positions(aid)[disc:]
        alive = res.alive_flags(aid)[disc:].astype(bool)
        d = np.hypot(pos[:, 0] - hazard[0], pos[:, 1] - hazard[1])
        regular_p5[aid] = np.percentile(d[alive], 5)
    elapsed = time.monotonic() - t0
    assert mean_dist < 0.1
    assert all(p > 0.12 for p in regular_p5.values())
    assert elapsed < 60.0
    report(
        "heterogeneous blocker",
        f"blocker mean dist {mean_dist:.3f}, regular 5th-pct distances "
        f"{', '.join(f'{v:.2f}' for v in regular_p5.values())}, {elapsed:.0f}s",
    )


def test_robustness_agent_loss_and_partition():
    t0 = time.monotonic()
    # (a) two of four agents fail at t=30
    sc = Scenario(
        name="loss",
        seed=4,
        duration=60.0,
        agents=FIXED_STARTS,
        events=(
            ScenarioEvent(time=30.0, kind="agent_failure", agent_id="r0"),
            ScenarioEvent(time=30.0, kind="agent_failure", agent_id="r1"),
        ),
    )
    t_axis, _, fused = run(sc).metric_series()
    windows = [
        fused[(t_axis > w0) & (t_axis <= w0 + 5.0)].mean() for w0 in np.arange(30.0, 60.0, 5.0)
    ]
    assert all(b < a for a, b in zip(windows, windows[1:])), windows

    # (b) total partition: every agent must still cover on its own
    sc2 = Scenario(
        name="partition",
        seed=4,
        duration=60.0,
        agents=FIXED_STARTS,
        net=NetModel(drop_prob=1.0),
    )
    _, per_agent, _ = run(sc2).metric_series()
    ratios = {aid: series[-1] / series[9] for aid, series in per_agent.items()}
    assert all(r < 0.20 for r in ratios.values()), ratios
    elapsed = time.monotonic() - t0
    assert elapsed < 120.0
    report(
        "robustness",
        f"post-loss windows {['%.4f' % w for w in windows]} decreasing; "
        f"partition ratios worst {max(ratios.values()):.3f}, {elapsed:.0f}s",
    )


def test_replay_determinism(tmp_path):
    t0 = time.monotonic()
    sc = Scenario(
        name="determinism",
        seed=12,
        duration=20.0,
        agents=FIXED_STARTS,
        hidden_dds=((0.5, 0.5),),
        hidden_ees=((0.7, 0.3),),
        net=NetModel(topology="random", edge_prob=0.6, drop_prob=0.3),
        events=(ScenarioEvent(time=8.0, kind="user_command", points=((0.2, 0.2), (0.24, 0.2))),),
    )
    out = []
    for tag in ("a", "b"):
        res = run(sc)
        res.summary = summarize(res)
        write_outputs(res, tmp_path / tag)
        out.append((tmp_path / tag / "frames.jsonl").read_bytes())
    elapsed = time.monotonic() - t0
    assert out[0] == out[1]
    report("replay determinism", f"frames.jsonl byte-identical across reruns, {elapsed:.0f}s")
