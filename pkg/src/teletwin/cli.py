"""Command-line surface: replay, serve, validate, report.

Exit codes: 0 success, 2 usage (argparse), 3 scenario or config error,
4 input log error, 5 filesystem error.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .config import ConfigError, EngineConfig, dump_config, load_config
from .scenario import ScenarioDefinition, ScenarioError, load_bundled, load_scenario
from .session import LogError, read_log, run_replay

EXIT_SCENARIO = 3
EXIT_LOG = 4
EXIT_IO = 5


def _load_definition(ref: str) -> ScenarioDefinition:
    """A scenario reference is a bundled id or a path to a scenario file."""
    path = Path(ref)
    if path.suffix == ".json" or path.exists():
        try:
            return load_scenario(path.read_text())
        except OSError as exc:
            raise ScenarioError(f"cannot read scenario file {ref}: {exc}") from None
    return load_bundled(ref)


def _load_engine_config(path: str | None) -> EngineConfig:
    if path is None:
        return EngineConfig()
    try:
        return load_config(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from None


def cmd_replay(args) -> int:
    try:
        definition = _load_definition(args.scenario)
        cfg = _load_engine_config(args.config)
    except (ScenarioError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SCENARIO
    try:
        frames = read_log(Path(args.log).read_text())
    except OSError as exc:
        print(f"error: cannot read log {args.log}: {exc}", file=sys.stderr)
        return EXIT_IO
    except LogError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_LOG
    report, state = run_replay(definition, frames, cfg)
    out = Path(args.out) if args.out else Path(args.log).with_suffix(".report.json")
    try:
        out.write_text(report)
    except OSError as exc:
        print(f"error: cannot write report {out}: {exc}", file=sys.stderr)
        return EXIT_IO
    doc = json.loads(report)
    print(f"{definition.id}: {doc['status']} total={doc['total']} "
          f"ticks={doc['end_tick']} -> {out}")
    return 0


def cmd_validate(args) -> int:
    try:
        definition = _load_definition(args.scenario)
        cfg = _load_engine_config(args.config)
    except (ScenarioError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SCENARIO
    print(f"scenario '{definition.id}' ok: {definition.title}")
    print(f"  actions: {len(definition.actions)}, objects: {len(definition.objects)}")
    for i, action in enumerate(definition.actions):
        print(f"  [{i}] {action.kind.value} x{action.repetitions} "
              f"-> {', '.join(action.targets)}")
    if args.print_config:
        print(dump_config(cfg), end="")
    return 0


def cmd_report(args) -> int:
    try:
        doc = json.loads(Path(args.report).read_text())
    except OSError as exc:
        print(f"error: cannot read report {args.report}: {exc}", file=sys.stderr)
        return EXIT_IO
    except json.JSONDecodeError as exc:
        print(f"error: {args.report} is not valid JSON: {exc}", file=sys.stderr)
        return EXIT_LOG
    if doc.get("format") != "teletwin-report":
        print(f"error: {args.report} is not a teletwin report", file=sys.stderr)
        return EXIT_LOG
    eff = doc["efficiency"]
    print(f"scenario : {doc['scenario_id']}")
    print(f"status   : {doc['status']}")
    print(f"duration : {doc['duration_s']} s ({doc['end_tick']} ticks)")
    print(f"time     : {eff['total_time']['points']:.1f} pts "
          f"({eff['total_time']['value_s']} s)")
    print(f"motion   : {eff['economy_of_motion']['points']:.1f} pts "
          f"({eff['economy_of_motion']['value_m']} m-eq)")
    if doc["penalties"]:
        for p in doc["penalties"]:
            print(f"penalty  : {p['kind']} x{p['count']} -> -{p['deducted']}")
    else:
        print("penalty  : none")
    print(f"total    : {doc['total']}")
    return 0


def cmd_serve(args) -> int:
    try:
        cfg = _load_engine_config(args.config)
    except (ScenarioError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SCENARIO
    from .server import serve
    static = args.static if args.static else None
    print(f"serving on ws://127.0.0.1:{args.port}/ws (sessions -> {args.out})")
    serve(cfg, port=args.port, out_dir=args.out, static_dir=static)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="teletwin",
        description="Deterministic two-arm surgical teleoperation trainer engine")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("replay", help="replay a recorded input log and write a report")
    p.add_argument("scenario", help="bundled scenario id or scenario file path")
    p.add_argument("log", help="input log (.jsonl)")
    p.add_argument("--config", help="engine config file")
    p.add_argument("--out", help="report output path (default: <log>.report.json)")
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("serve", help="run the live websocket session service")
    p.add_argument("--port", type=int, default=8700)
    p.add_argument("--config", help="engine config file")
    p.add_argument("--out", default="sessions", help="directory for session artifacts")
    p.add_argument("--static", help="serve a console UI build from this directory")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("validate", help="validate a scenario (and optional config)")
    p.add_argument("scenario", help="bundled scenario id or scenario file path")
    p.add_argument("--config", help="engine config file")
    p.add_argument("--print-config", action="store_true",
                   help="print the effective engine config with all defaults")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("report", help="pretty-print a report file")
    p.add_argument("report", help="report JSON path")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
