"""Command-line entry point: results CSV in, PNG out."""

from __future__ import annotations

import argparse
import sys

from .core import (
    PlotSpec,
    dump_box_series,
    dump_line_series,
    plot_box,
    plot_lines,
)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plot-cli",
        description="figures from experiment result CSVs",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    lines = sub.add_parser(
        "lines", help="mean value vs x per group, with 95%% bands")
    lines.add_argument("csvfile")
    lines.add_argument("--x", required=True, help="x-axis column")

    box = sub.add_parser("box", help="one box per group")
    box.add_argument("csvfile")

    for p in (lines, box):
        p.add_argument("--group-by", default="",
                       help="comma-separated grouping columns")
        p.add_argument("--y", default="accuracy", help="value column")
        p.add_argument("--scale", choices=("linear", "log"),
                       default="linear", help="value axis scale")
        p.add_argument("--out", required=True, help="PNG output path")
        p.add_argument("--dump-series", default=None,
                       help="also write the plotted numbers as CSV")
    return parser


def _spec_from(args) -> PlotSpec:
    group_by = [c.strip() for c in args.group_by.split(",") if c.strip()]
    return PlotSpec(csv_path=args.csvfile, out=args.out,
                    x=getattr(args, "x", None), group_by=group_by,
                    y=args.y, scale=args.scale)


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    spec = _spec_from(args)
    try:
        if args.command == "lines":
            series = plot_lines(spec)
            if args.dump_series:
                dump_line_series(series, spec, args.dump_series)
        else:
            series = plot_box(spec)
            if args.dump_series:
                dump_box_series(series, spec, args.dump_series)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {spec.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
