"""Command-line entry point.

    macont mesh|approx|joint|verify --config exp.json [--out DIR] [--k-max K] [--quiet]
    macont demo NAME [--out DIR] [--k-max K] [--quiet]

Exit status: 0 all checks pass, 1 a check failed, 2 invalid config, 3 internal error.
"""

from __future__ import annotations

import argparse
import json
import sys
import traceback
from pathlib import Path

from .pipeline import (CONFIG_ERRORS, EXIT_CONFIG, EXIT_INTERNAL, normalize_config, run_experiment,
                       summary_text)
from .registry import DEMOS, demo_config

COMMANDS = ("mesh", "approx", "joint", "verify")


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="JSON experiment config")
    p.add_argument("--out", type=Path, help="output directory (default: config output.dir or ./macont-out)")
    p.add_argument("--k-max", type=int, dest="k_max", help="override schedule.k_max")
    p.add_argument("--seed", type=int, help="reserved; every pipeline is deterministic")
    p.add_argument("--quiet", action="store_true", help="do not print the summary")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="macont", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "mesh": "emit disk meshes for each k",
        "approx": "build the smoothed approximation sequence and check it",
        "joint": "slice the sequence along y_i = x_j and check the result",
        "verify": "run the checks only (joint when the config has a slice section)",
    }
    for name in COMMANDS:
        _common(sub.add_parser(name, help=helps[name]))
    demo = sub.add_parser("demo", help="run a built-in experiment")
    demo.add_argument("name", help=", ".join(sorted(DEMOS)))
    _common(demo)
    return parser


def _load(args) -> tuple[str, dict]:
    if args.command == "demo":
        raw = demo_config(args.name)
        command = "joint" if "slice" in raw else "approx"
    else:
        if args.config is None:
            raise FileNotFoundError("--config is required")
        with open(args.config) as fh:
            raw = json.load(fh)
        command = args.command
    return command, normalize_config(raw, args.k_max)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        command, cfg = _load(args)
    except (OSError, json.JSONDecodeError, *CONFIG_ERRORS) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = args.out or Path(cfg.get("output", {}).get("dir", "macont-out"))
    try:
        status, result = run_experiment(command, cfg, out)
    except CONFIG_ERRORS as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception:
        traceback.print_exc()
        return EXIT_INTERNAL
    if not args.quiet:
        sys.stdout.write(summary_text(command, cfg, result))
        print(f"artifacts written to {out}")
    return status


if __name__ == "__main__":
    sys.exit(main())
