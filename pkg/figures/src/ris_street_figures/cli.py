"""Command line: ris-street-figures render <kind> <csv> <out-image>."""

from __future__ import annotations

import argparse
import sys

from .render import FIGURE_KINDS, FigureError, FigureSpec, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ris-street-figures")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("render", help="render one figure from a sweep CSV")
    p.add_argument("kind", choices=FIGURE_KINDS)
    p.add_argument("csv")
    p.add_argument("out_image")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        out = render(FigureSpec(kind=args.kind, csv_path=args.csv,
                                out_path=args.out_image))
    except FigureError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
