"""Command-line entry point.

    rabicrit <spectrum|dynamics|dephasing|metrology|sweep>
             --config FILE [--out DIR] [--format csv|json] [--jobs N]

Exit codes: 0 success, 1 configuration error, 2 numerical failure, 3 I/O.
"""
from __future__ import annotations

import argparse
import sys

from .config import TASKS, parse_config
from .errors import ConfigError, RabicritError
from .runner import run_subcommand, write_bundle


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rabicrit", description=__doc__)
    sub = parser.add_subparsers(dest="task", required=True)
    for task in TASKS:
        p = sub.add_parser(task, help=f"run the {task} task")
        p.add_argument("--config", required=True, help="TOML configuration file")
        p.add_argument("--out", default=None, help="output directory (default from config)")
        p.add_argument("--format", default=None, choices=("csv", "json"),
                       help="output format (default from config)")
        p.add_argument("--jobs", type=int, default=1, help="concurrent sweep points")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        with open(args.config, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        print(f"error reading config: {exc}", file=sys.stderr)
        return 3

    try:
        config = parse_config(text, args.task)
    except ConfigError as exc:
        print(f"{len(exc.problems)} configuration problem(s):", file=sys.stderr)
        for problem in exc.problems:
            print(f"  - {problem}", file=sys.stderr)
        return 1

    try:
        bundle = run_subcommand(args.task, config, jobs=max(1, args.jobs))
    except RabicritError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2

    out_dir = args.out or config.output.directory
    fmt = args.format or config.output.format
    try:
        written = write_bundle(bundle, out_dir, fmt)
    except OSError as exc:
        print(f"I/O failure writing {out_dir}: {exc}", file=sys.stderr)
        return 3
    print(f"{args.task}: wrote {len(written)} file(s) to {out_dir} "
          f"in {bundle.wall_time_s:.2f}s", file=sys.stderr)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
