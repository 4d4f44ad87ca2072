"""Command line: render one figure analogue from an artifact directory."""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .artifacts import SchemaError
from .figures import BUILDERS, FigureSpec, render


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="render",
        description="Redraw one of the landscape-study figures from the "
        "experiment driver's CSV artifacts.",
    )
    parser.add_argument("--fig", required=True, choices=sorted(BUILDERS))
    parser.add_argument("--indir", required=True, help="directory holding the CSV artifacts")
    parser.add_argument("--out", required=True, help="output image path (.png or .svg)")
    parser.add_argument("--dpi", type=int, default=200)
    args = parser.parse_args(argv)
    try:
        out = render(FigureSpec(args.fig, Path(args.indir), Path(args.out), args.dpi))
    except (SchemaError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
