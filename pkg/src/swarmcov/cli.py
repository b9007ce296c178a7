"""Command-line entry point.

    swarmcov run <scenario.yaml> [--seed N] [--out DIR] [--serve PORT]

Headless by default: runs the scenario to completion and writes frames.jsonl,
metric.csv, summary.json, and messages.jsonl to --out. With --serve the
operator bridge is started on the given port and ticks are paced to sim time
so connected consoles can watch and steer.

Exit codes: 0 success, 2 invalid scenario, 3 planner divergence.
"""

from __future__ import annotations

import argparse
import sys

from swarmcov.harness import SimulationAbort, run, write_outputs
from swarmcov.scenario import ScenarioError, load_scenario

EXIT_OK = 0
EXIT_BAD_SCENARIO = 2
EXIT_DIVERGED = 3


def _cmd_run(args) -> int:
    try:
        scenario = load_scenario(args.scenario)
        if args.seed is not None:
            scenario = scenario.with_seed(args.seed)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_SCENARIO

    bridge = None
    server = None
    pace = 0.0
    if args.serve is not None:
        from swarmcov.uibridge import Bridge, start_server

        bridge = Bridge(scenario_meta(scenario))
        server = start_server(bridge, args.serve)
        pace = scenario.tick_dt * args.pace_factor
        print(f"operator bridge on ws://127.0.0.1:{args.serve}/ws", file=sys.stderr)

    try:
        result = run(scenario, bridge=bridge, pace=pace)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_SCENARIO
    except SimulationAbort as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    finally:
        if server is not None:
            server.should_exit = True

    if args.out:
        write_outputs(result, args.out)
        print(f"wrote frames.jsonl, metric.csv, summary.json, messages.jsonl to {args.out}")
    s = result.summary
    print(
        f"{s['name']}: {s['ticks']} ticks, fused metric "
        f"{s['initial_fused_metric']:.4g} -> {s['final_fused_metric']:.4g}, "
        f"{len(s['disablements'])} disablement(s), {len(s['discoveries'])} discovery(ies)"
    )
    return EXIT_OK


def scenario_meta(scenario) -> dict:
    return {
        "name": scenario.name,
        "seed": scenario.seed,
        "duration": scenario.duration,
        "tick_dt": scenario.tick_dt,
        "world_min": list(scenario.world_min),
        "world_max": list(scenario.world_max),
        "agents": [
            {"id": a.agent_id, "model": a.model_kind, "role": a.role}
            for a in scenario.agents
        ],
    }


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="swarmcov", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run a scenario")
    run_p.add_argument("scenario", help="scenario YAML file")
    run_p.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    run_p.add_argument("--out", default=None, help="directory for run outputs")
    run_p.add_argument("--serve", type=int, default=None, help="serve the operator bridge on this port")
    run_p.add_argument(
        "--pace-factor",
        type=float,
        default=1.0,
        help="with --serve, wall seconds per sim tick as a multiple of tick_dt",
    )
    run_p.set_defaults(func=_cmd_run)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
