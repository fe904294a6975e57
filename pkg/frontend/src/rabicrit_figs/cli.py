"""Command-line figure renderer.

    rabicrit-figs <population_grid|coherence_surface|cq_curves>
                  --input DIR --out FILE [--linear-y]

The input directory is one rabicrit output directory: population_grid reads
panels.csv plus traj_*.csv, coherence_surface reads coherence_scan.csv, and
cq_curves reads metrology.csv.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .render import KINDS, FigureSpec, render
from .schemas import SchemaError

_DEFAULT_INPUT = {
    "coherence_surface": "coherence_scan.csv",
    "cq_curves": "metrology.csv",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rabicrit-figs", description=__doc__)
    parser.add_argument("kind", choices=KINDS)
    parser.add_argument("--input", required=True, help="rabicrit output directory")
    parser.add_argument("--out", required=True, help="image file to write (.png or .svg)")
    parser.add_argument("--linear-y", action="store_true",
                        help="linear instead of log y axis where applicable")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    base = Path(args.input)
    if args.kind == "population_grid":
        inputs = tuple(sorted(str(p) for p in base.glob("*.csv")))
    else:
        inputs = (str(base / _DEFAULT_INPUT[args.kind]),)
    spec = FigureSpec(kind=args.kind, inputs=inputs, out=args.out,
                      style={"logy": not args.linear_y})
    try:
        out = render(spec)
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 3
    print(f"wrote {out}", file=sys.stderr)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
