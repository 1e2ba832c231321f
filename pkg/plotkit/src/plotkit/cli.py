"""Command-line figure rendering from harness CSVs.

``plot curves <csv> --out fig.png`` draws the per-policy cumulative reward
comparison; ``plot freqs <csv> --out fig.png`` draws the play-frequency bar
chart.  Exit codes: 0 success, 2 off-schema or unreadable input, 3
unexpected failure.
"""

from __future__ import annotations

import argparse
import sys

from .curves import SchemaError, load_curves, load_frequencies
from .render import render_comparison, render_frequencies


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plot",
        description="Render policy-comparison figures from harness CSV files",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text, csv_hint in (
        ("curves", "cumulative discounted reward curves with CI bands",
         "per-step curves CSV"),
        ("freqs", "per-arm play frequency bars", "results CSV"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("csv", metavar="CSV", help=csv_hint)
        p.add_argument("--out", required=True, metavar="IMAGE",
                       help="output image path (.png or .svg)")
        p.add_argument("--title", help="optional figure title")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "curves":
            out = render_comparison(load_curves(args.csv), args.out,
                                    title=args.title)
        else:
            out = render_frequencies(load_frequencies(args.csv), args.out,
                                     title=args.title)
        print(out)
        return 0
    except SchemaError as err:
        print(f"schema error: {err}", file=sys.stderr)
        return 2
    except Exception as err:
        print(f"error: {err}", file=sys.stderr)
        return 3


def entry() -> None:
    sys.exit(main())
