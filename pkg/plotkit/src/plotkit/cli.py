"""Standalone figure rendering: plotkit --kind states --in traj.csv --out fig.png"""

from __future__ import annotations

import argparse
import sys

from .figures import FIGURE_KINDS, render


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="plotkit")
    parser.add_argument("--kind", required=True, choices=FIGURE_KINDS)
    parser.add_argument("--in", dest="in_path", required=True,
                        help="trajectory CSV (or sweep CSV for --kind sweep)")
    parser.add_argument("--out", required=True, help="output image (.png/.svg)")
    parser.add_argument("--plane", default="xz", choices=["xy", "xz", "zy", "yz"],
                        help="projection plane for plane-view")
    args = parser.parse_args(argv)
    try:
        render(args.kind, args.in_path, args.out, plane=args.plane)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
