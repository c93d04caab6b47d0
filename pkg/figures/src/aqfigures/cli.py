"""Command line entry point: render one figure from an artifact tree."""

from __future__ import annotations

import argparse
import sys

from .figures import FIGURE_IDS, FigureSpec, render


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="aqfigures",
        description="Render figures from sweep-analysis CSV artifacts.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    cmd = sub.add_parser("render", help="draw one figure from a CSV tree")
    cmd.add_argument("--figure", required=True, choices=FIGURE_IDS, help="which view to draw")
    cmd.add_argument("--in", dest="in_dir", required=True, help="artifact directory to read")
    cmd.add_argument("--out", required=True, help="output image path (.svg, .pdf or .png)")
    cmd.add_argument("--log-scale", action="store_true", help="log axes for the figures of merit")
    cmd.add_argument("--dpi", type=int, default=150, help="raster resolution (png only)")
    args = parser.parse_args(argv)

    try:
        spec = FigureSpec(
            figure_id=args.figure,
            in_dir=args.in_dir,
            out_path=args.out,
            log_scale=args.log_scale,
            dpi=args.dpi,
        )
        out = render(spec)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
