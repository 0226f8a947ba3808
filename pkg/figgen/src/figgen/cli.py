"""figgen command line: render simulator CSVs into the standard layouts."""

from __future__ import annotations

import argparse
import sys

from . import __version__
from .layouts import LAYOUTS, render
from .reader import CsvFormatError


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="figgen",
                                 description="render mqcsim CSV outputs into figures")
    ap.add_argument("--version", action="version", version=__version__)
    ap.add_argument("--layout", required=True, choices=sorted(LAYOUTS))
    ap.add_argument("--in", dest="inputs", nargs="+", required=True,
                    metavar="CSV", help="input CSV file(s), layout-specific order")
    ap.add_argument("--out", required=True, help="output image path")
    ap.add_argument("--xlabel", default=None)
    ap.add_argument("--ylabel", default=None)
    args = ap.parse_args(argv)
    try:
        render(args.layout, args.inputs, args.out,
               xlabel=args.xlabel, ylabel=args.ylabel)
    except CsvFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
