"""Figure-rendering command line: nmsfigures render --kind ... --in ... --out ..."""

from __future__ import annotations

import argparse
import sys
from typing import Optional, Sequence

from .render import KINDS, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nmsfigures")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("render", help="render one figure from CSV exports")
    p.add_argument("--kind", required=True, choices=sorted(KINDS))
    p.add_argument("--in", dest="inputs", nargs="+", required=True,
                   help="input CSV file(s); circle takes nodes.csv edges.csv")
    p.add_argument("--out", required=True, help="output image path (png/svg/pdf)")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        n = render(args.kind, args.inputs, args.out)
    except (OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"{args.out}: {args.kind} ({n} elements)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
