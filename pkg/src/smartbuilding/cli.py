"""Command line entry points: run, replay, report, serve."""

from __future__ import annotations

import argparse
import dataclasses
import sys
from importlib import resources
from typing import Optional

from smartbuilding.analytics import build_report, bundled_table, load_table, report_lines
from smartbuilding.config import ConfigError, load_config
from smartbuilding.devices import Scenario, ScenarioError, load_scenario
from smartbuilding.runtime import Runtime, verify_replay


def _load_scenario_arg(trace: Optional[str]) -> Scenario:
    if trace is not None:
        return load_scenario(trace)
    ref = resources.files("smartbuilding").joinpath("data/demo.scenario")
    with resources.as_file(ref) as path:
        return load_scenario(str(path))


def _apply_overrides(scenario: Scenario, args: argparse.Namespace) -> Scenario:
    updates = {}
    if getattr(args, "duration", None) is not None:
        updates["duration_ms"] = args.duration
    if getattr(args, "seed", None) is not None:
        updates["seed"] = args.seed
    return dataclasses.replace(scenario, **updates) if updates else scenario


def _cmd_run(args: argparse.Namespace) -> int:
    scenario = _apply_overrides(_load_scenario_arg(args.trace), args)
    config = load_config(args.config) if args.config else None
    runtime = Runtime(scenario, config=config, out_dir=args.out)
    snap = runtime.run()
    if not args.quiet:
        print(f"scenario {scenario.name!r} finished at t={snap['t']} ms "
              f"({snap['seq']} events)")
        counts = snap["links"]
        print(f"links: delivered={counts['delivered']} queued={counts['queued']} "
              f"dropped={counts['dropped']} cost={counts['total_cost']:g}")
        entries = " ".join(f"ch{cid}={n}" for cid, n in sorted(snap["channels"].items()))
        print(f"telemetry entries: {entries}")
        if args.out:
            print(f"artifacts in {args.out}")
    return 0


def _cmd_replay(args: argparse.Namespace) -> int:
    if verify_replay(args.out):
        print("replay OK: event log reproduces the snapshot")
        return 0
    print("replay MISMATCH: event log does not reproduce the snapshot")
    return 1


def _cmd_report(args: argparse.Namespace) -> int:
    table = load_table(args.csv) if args.csv else bundled_table()
    for line in report_lines(build_report(table)):
        print(line)
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    from smartbuilding.server import serve

    scenario = _apply_overrides(_load_scenario_arg(args.trace), args)
    config = load_config(args.config) if args.config else None
    runtime = Runtime(scenario, config=config, out_dir=args.out)
    print(f"serving scenario {scenario.name!r} on http://{args.host}:{args.port} "
          f"(speed x{args.speed:g})")
    serve(runtime, host=args.host, port=args.port, speed=args.speed)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="smartbuilding",
        description="Desk-scale building automation simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run a scenario to completion")
    run_p.add_argument("--trace", help="scenario file (default: bundled demo)")
    run_p.add_argument("--config", help="INI config file (default: $BMS_CONFIG or built-ins)")
    run_p.add_argument("--duration", type=int, help="override duration in ms")
    run_p.add_argument("--seed", type=int, help="override the scenario seed")
    run_p.add_argument("--out", help="artifact directory")
    run_p.add_argument("--quiet", action="store_true")
    run_p.set_defaults(func=_cmd_run)

    replay_p = sub.add_parser("replay", help="verify a run's event log against its snapshot")
    replay_p.add_argument("--out", required=True, help="artifact directory of a finished run")
    replay_p.set_defaults(func=_cmd_replay)

    report_p = sub.add_parser("report", help="sensor-accuracy report from a comparison table")
    report_p.add_argument("--csv", help="observed-vs-official CSV (default: bundled)")
    report_p.set_defaults(func=_cmd_report)

    serve_p = sub.add_parser("serve", help="run a scenario behind the HTTP API")
    serve_p.add_argument("--trace", help="scenario file (default: bundled demo)")
    serve_p.add_argument("--config", help="INI config file")
    serve_p.add_argument("--duration", type=int, help="override duration in ms")
    serve_p.add_argument("--seed", type=int, help="override the scenario seed")
    serve_p.add_argument("--out", help="artifact directory")
    serve_p.add_argument("--host", default="127.0.0.1")
    serve_p.add_argument("--port", type=int, default=8000)
    serve_p.add_argument("--speed", type=float, default=10.0,
                         help="sim-time acceleration factor (default 10x)")
    serve_p.set_defaults(func=_cmd_serve)
    return parser


def main(argv: Optional[list] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ScenarioError, ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
