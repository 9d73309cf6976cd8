"""hackcar-sim command line: run, validate, replay, serve."""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

from .scenario import ConfigError, RunReport, load_scenario_file, run
from .teleop import TraceError, TraceSource, load_trace


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hackcar-sim",
                                     description="Virtual CAN testbed runner")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute a scenario headlessly")
    p_run.add_argument("scenario", help="scenario file (TOML)")
    _add_output_args(p_run)
    p_run.set_defaults(func=_cmd_run)

    p_val = sub.add_parser("validate", help="check a scenario file")
    p_val.add_argument("scenario")
    p_val.set_defaults(func=_cmd_validate)

    p_rep = sub.add_parser("replay", help="run a scenario with a recorded command trace")
    p_rep.add_argument("--trace", required=True, help="command trace CSV")
    p_rep.add_argument("scenario")
    _add_output_args(p_rep)
    p_rep.set_defaults(func=_cmd_replay)

    p_srv = sub.add_parser("serve", help="live run with the WebSocket gateway and cockpit")
    p_srv.add_argument("scenario")
    p_srv.add_argument("--host", default="127.0.0.1")
    p_srv.add_argument("--port", type=int, default=8700)
    p_srv.add_argument("--static", default=None,
                       help="cockpit asset directory (default: bundled frontend/dist)")
    p_srv.add_argument("--rate", type=float, default=1.0,
                       help="sim seconds per wall second; 0 runs unpaced")
    p_srv.add_argument("--out", default=None, help="directory for end-of-run logs")
    p_srv.set_defaults(func=_cmd_serve)

    return parser


def _add_output_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", default=".", help="output directory (default: .)")
    p.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    p.add_argument("--candump", action="store_true", help="write candump.log")
    p.add_argument("--telemetry-csv", action="store_true", help="write telemetry.csv")


def _load(args) -> "ScenarioConfig":
    config = load_scenario_file(args.scenario)
    if getattr(args, "seed", None) is not None:
        from dataclasses import replace

        config = replace(config, seed=args.seed)
    return config


def _print_summary(report: RunReport) -> None:
    s = report.summary
    def fmt(v):
        if v is None:
            return "undefined"
        if isinstance(v, float) and math.isinf(v):
            return "inf"
        return f"{v:.4g}" if isinstance(v, float) else str(v)

    print(f"cycles={len(report.telemetry)} frames={len(report.tx_records)} "
          f"alerts={len(report.alerts)}")
    print(f"stopped={str(s.stopped).lower()} stop_latency_s={fmt(s.stop_latency_s)} "
          f"collided={str(s.collided).lower()}")
    print(f"detection_time_s={fmt(s.detection_time_s)} settled_time_s={fmt(s.settled_time_s)}")
    print(f"rpm_variance_pre={fmt(s.rpm_variance_pre)} "
          f"rpm_variance_attack={fmt(s.rpm_variance_attack)} "
          f"mean_rpm_attack={fmt(s.mean_rpm_attack)}")
    if report.utilization_series:
        mean_u = sum(report.utilization_series) / len(report.utilization_series)
        print(f"bus_utilization_mean={mean_u:.6f}")


def _write_outputs(report: RunReport, args) -> None:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.candump:
        (out / "candump.log").write_text(report.candump)
        print(f"wrote {out / 'candump.log'}")
    if args.telemetry_csv:
        (out / "telemetry.csv").write_text(report.telemetry_csv())
        print(f"wrote {out / 'telemetry.csv'}")
    if args.candump or args.telemetry_csv:
        (out / "alerts.csv").write_text(report.alerts_csv())
        print(f"wrote {out / 'alerts.csv'}")


def _cmd_run(args) -> int:
    config = _load(args)
    source = None
    if config.teleop_trace:
        source = TraceSource(load_trace(Path(config.teleop_trace).read_text()))
    report = run(config, command_source=source)
    _print_summary(report)
    _write_outputs(report, args)
    return 0


def _cmd_validate(args) -> int:
    _load(args)
    print(f"{args.scenario}: OK")
    return 0


def _cmd_replay(args) -> int:
    config = _load(args)
    trace = load_trace(Path(args.trace).read_text())
    report = run(config, command_source=TraceSource(trace))
    _print_summary(report)
    _write_outputs(report, args)
    return 0


def _cmd_serve(args) -> int:
    from .server import serve  # aiohttp pulled in lazily

    config = _load(args)
    static = Path(args.static) if args.static else _default_static_dir()
    serve(config, host=args.host, port=args.port, static_dir=static,
          rate=args.rate, out_dir=Path(args.out) if args.out else None)
    return 0


def _default_static_dir() -> Path:
    here = Path(__file__).resolve()
    for parent in here.parents:
        candidate = parent / "frontend" / "dist"
        if candidate.is_dir():
            return candidate
    return here.parent / "static"


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, TraceError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
