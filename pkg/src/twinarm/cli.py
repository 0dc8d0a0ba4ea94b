"""Command-line entry point.

Exit codes: 0 success, 2 validation error, 3 transport error.
"""

from __future__ import annotations

import argparse
import socket
import sys
import urllib.parse

from .config import ConfigError, load_config
from .experiments import SHAPES, run_gap_scenario, run_trajectory_experiment
from .mapping import PROFILE_NAMES, ScaleMapping
from .protocol import TraceFormatError, replay_trace
from .session import SessionConfig, TransportError, run_session, send_frame

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_TRANSPORT = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="twinarm",
        description="Physical-twin teleoperation of a tendon-driven continuum arm",
    )
    parser.add_argument("--config", help="configuration file (INI)", default=None)
    sub = parser.add_subparsers(dest="command", required=True)

    # --config is accepted before or after the subcommand; SUPPRESS keeps the
    # subparser from clobbering a top-level value with its default
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="configuration file (INI)",
                        default=argparse.SUPPRESS)

    exp = sub.add_parser("experiment", help="run a trajectory experiment",
                         parents=[common])
    exp.add_argument("--shape", choices=SHAPES, default="circle")
    exp.add_argument("--stiffness", choices=PROFILE_NAMES, default=None)
    exp.add_argument("--scale", type=float, default=None)
    exp.add_argument("--duration", type=float, default=60.0)
    exp.add_argument("--out", required=True, help="output directory")

    gap = sub.add_parser("gap-demo", help="run the narrow-gap scenario",
                         parents=[common])
    gap.add_argument("--out", default=None, help="output directory")

    serve = sub.add_parser("serve", help="run the live session + console feed",
                           parents=[common])
    serve.add_argument("--port", type=int, default=7410)
    serve.add_argument("--console", default=None, help="directory of console static files")

    rep = sub.add_parser("replay", help="replay a recorded trace",
                         parents=[common])
    rep.add_argument("trace", help="trace CSV file")
    rep.add_argument("--scale", type=float, default=None)
    rep.add_argument("--out", default=None, help="re-recorded executor trace CSV")
    rep.add_argument("--endpoint", default=None,
                     help="tcp://host:port to stream mapped frames to")
    return parser


def _load(args):
    cfg = load_config(args.config)
    if getattr(args, "scale", None) is not None:
        if not args.scale > 0.0:
            raise ConfigError("--scale must be positive")
        cfg.scale = ScaleMapping(args.scale)
    if getattr(args, "stiffness", None):
        cfg.profile = cfg.profile.with_levels(args.stiffness)
    return cfg


def _cmd_experiment(args) -> int:
    cfg = _load(args)
    if not args.duration > 0.0:
        raise ConfigError("--duration must be positive")
    result = run_trajectory_experiment(args.shape, cfg, args.duration, out_dir=args.out)
    cells = ", ".join(
        "n/a" if flagged else f"{value:.3g}%"
        for value, flagged in zip(result.deviation.percent, result.deviation.zero_range)
    )
    print(f"{args.shape}: deviation (x, y, z) = {cells}")
    print(f"outputs in {args.out}: {', '.join(sorted(result.outputs))}")
    return EXIT_OK


def _cmd_gap(args) -> int:
    cfg = _load(args)
    log = run_gap_scenario(cfg, out_dir=args.out)
    for phase in log.phases:
        print(f"{phase.t_start:6.1f}s  {phase.name:<18} profile {phase.profile}  "
              f"tip ({phase.tip_end[0]:+.3f}, {phase.tip_end[1]:+.3f}, {phase.tip_end[2]:+.3f})")
    print(f"total {log.total_duration:.1f}s, profile sequence {'-'.join(log.profile_sequence())}")
    return EXIT_OK


def _cmd_serve(args) -> int:
    from .server import serve  # deferred: pulls in fastapi/uvicorn

    cfg = _load(args)
    serve(cfg, port=args.port, console_dir=args.console)
    return EXIT_OK


def _parse_tcp(endpoint: str) -> tuple[str, int]:
    url = urllib.parse.urlparse(endpoint)
    if url.scheme != "tcp" or not url.hostname or not url.port:
        raise ConfigError(f"expected tcp://host:port, got {endpoint!r}")
    return url.hostname, url.port


def _cmd_replay(args) -> int:
    cfg = _load(args)
    frames = list(replay_trace(args.trace))
    print(f"replaying {len(frames)} frames from {args.trace}")
    session_cfg = SessionConfig(rate_hz=cfg.rate_hz, scale=cfg.scale,
                                profile=cfg.profile, tracking=cfg.tracking)
    if args.endpoint:
        host, port = _parse_tcp(args.endpoint)
        try:
            with socket.create_connection((host, port), timeout=5.0) as sock:
                stats = run_session(iter(frames), lambda f: send_frame(sock, f), session_cfg)
        except OSError as exc:
            raise TransportError(f"cannot reach {args.endpoint}: {exc}") from exc
    else:
        collected = []
        stats = run_session(iter(frames), collected.append, session_cfg)
        if args.out:
            from .protocol import record_trace

            record_trace(collected, args.out)
            print(f"executor trace written to {args.out}")
    if stats.error:
        raise TransportError(stats.error)
    print(f"delivered {stats.delivered}, dropped {stats.dropped}, stalls {stats.stalls}")
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "experiment": _cmd_experiment,
        "gap-demo": _cmd_gap,
        "serve": _cmd_serve,
        "replay": _cmd_replay,
    }
    try:
        return handlers[args.command](args)
    except (ConfigError, TraceFormatError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except TransportError as exc:
        print(f"transport error: {exc}", file=sys.stderr)
        return EXIT_TRANSPORT
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
