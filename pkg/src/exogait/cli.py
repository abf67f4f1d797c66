"""Command line entry points: scripted runs, trace normalization, and the
live pilot service."""

from __future__ import annotations

import argparse
import sys

from .behaviors import Behavior, BehaviorKind
from .parameters import ParameterStore, load_geometry_file
from .trace import (
    DEFAULT_LEAD_IN,
    export_csv,
    export_normalized_csv,
    import_csv,
    normalize_steps,
    run_scripted,
)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="exogait",
        description="Sagittal-plane exoskeleton gait trajectory engine",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    behaviors = [k.value for k in BehaviorKind if k is not BehaviorKind.STAND]

    run = sub.add_parser("run", help="scripted walk, exported as CSV")
    run.add_argument("--behavior", required=True, choices=behaviors)
    run.add_argument("--steps", required=True, type=int, help="number of steps (>= 1)")
    run.add_argument("--params", help="parameter config file (INI)")
    run.add_argument("--param-set", help="named parameter set to use")
    run.add_argument("--geom", help="leg geometry config file (INI)")
    run.add_argument("--dt", type=float, default=0.002, help="control period, s")
    run.add_argument("--lead-in", type=float, default=DEFAULT_LEAD_IN, help="standing lead-in, s")
    run.add_argument("--stone-length", type=float, help="stepping-stone step length, m")
    run.add_argument("--out", required=True, help="output CSV path")

    norm = sub.add_parser("normalize", help="average steps onto normalized time")
    norm.add_argument("--in", dest="infile", required=True, help="run CSV to read")
    norm.add_argument("--out", required=True, help="output CSV path")

    serve = sub.add_parser("serve", help="live pilot console service (TCP)")
    serve.add_argument("--bind", default="127.0.0.1:7170", help="addr:port to listen on")
    serve.add_argument("--rate", type=float, default=50.0, help="state stream rate, Hz")
    serve.add_argument("--params", help="parameter config file (INI)")
    serve.add_argument("--geom", help="leg geometry config file (INI)")
    serve.add_argument("--dt", type=float, default=0.002, help="control period, s")
    serve.add_argument(
        "--time-scale", type=float, default=1.0,
        help="simulation speed multiplier (1.0 = real time)",
    )

    return parser


def _cmd_run(args: argparse.Namespace) -> int:
    behavior = Behavior.parse(args.behavior, stone_length=args.stone_length)
    store = ParameterStore([args.params] if args.params else None)
    geom = load_geometry_file(args.geom) if args.geom else None
    params = args.param_set
    rows = run_scripted(
        behavior,
        args.steps,
        params=params,
        geom=geom,
        dt=args.dt,
        lead_in=args.lead_in,
        store=store,
    )
    export_csv(rows, args.out)
    print(f"wrote {len(rows)} rows to {args.out}")
    return 0


def _cmd_normalize(args: argparse.Namespace) -> int:
    rows = import_csv(args.infile)
    trace = normalize_steps(rows)
    export_normalized_csv(trace, args.out)
    print(
        f"averaged {trace.steps_averaged} steps; transfer region "
        f"[{trace.transfer_start:.4f}, {trace.transfer_end:.4f}]; wrote {args.out}"
    )
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    import asyncio

    from .service import serve_forever

    store = ParameterStore([args.params] if args.params else None)
    geom = load_geometry_file(args.geom) if args.geom else None
    host, _, port = args.bind.rpartition(":")
    if not host or not port.isdigit():
        raise ValueError(f"--bind must be addr:port, got {args.bind!r}")
    asyncio.run(
        serve_forever(
            host, int(port), geom=geom, store=store, dt=args.dt, rate=args.rate,
            time_scale=args.time_scale,
        )
    )
    return 0


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    handlers = {"run": _cmd_run, "normalize": _cmd_normalize, "serve": _cmd_serve}
    try:
        return handlers[args.command](args)
    except KeyboardInterrupt:
        return 130
    except Exception as exc:  # noqa: BLE001 - single CLI error funnel
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
