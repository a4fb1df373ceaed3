"""Command-line interface.

    dsvmsim run --config FILE [--seed N] [--out DIR] [--emit-svg]
    dsvmsim preset NAME [--seed N] [--out DIR] [--emit-svg]
    dsvmsim list-presets

Exit codes: 0 on success, 2 for configuration errors, 3 for runtime
failures. Worker-thread count for per-node updates is read from the
DSVMSIM_WORKERS environment variable (default 1).
"""

from __future__ import annotations

import argparse
import sys

from .errors import ConfigError, DsvmError
from .scenario import list_presets, load_config, load_preset, run_scenario


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=None,
                   help="override the master seed from the config")
    p.add_argument("--out", default=None, metavar="DIR",
                   help="directory for trace.csv, summary.txt and figures")
    p.add_argument("--emit-svg", action="store_true",
                   help="also render SVG line charts next to the CSV")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dsvmsim",
        description="Consensus-ADMM distributed SVM simulator with adversaries")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a scenario config file")
    p_run.add_argument("--config", required=True, metavar="FILE")
    _add_common(p_run)

    p_preset = sub.add_parser("preset", help="run a shipped preset scenario")
    p_preset.add_argument("name", help="preset name (see list-presets)")
    _add_common(p_preset)

    sub.add_parser("list-presets", help="list shipped preset scenarios")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "list-presets":
            for name in list_presets():
                print(name)
            return 0
        if args.command == "run":
            cfg = load_config(args.config)
            name = None
        else:
            cfg = load_preset(args.name)
            name = args.name
        result = run_scenario(cfg, out_dir=args.out, seed_override=args.seed,
                              emit_svg=args.emit_svg, name=name)
        for vname, trace in result.traces.items():
            g = trace.global_risks()
            print(f"{result.name}/{vname}: {trace.rounds} rounds, "
                  f"final global risk {g[-1]:.4f} "
                  f"({result.elapsed[vname]:.1f}s)")
        if result.out_dir is not None:
            print(f"outputs in {result.out_dir}")
        return 0
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except DsvmError as e:
        print(f"error: {e}", file=sys.stderr)
        return 3
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
