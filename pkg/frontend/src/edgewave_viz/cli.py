"""Plotting entry point: edgewave-plot --input FILE --kind KIND --out IMAGE."""

from __future__ import annotations

import argparse
import sys

from .plots import KINDS, FigureSpec, SchemaError, render


def build_parser():
    p = argparse.ArgumentParser(prog="edgewave-plot",
                                description="Render edgewave CSV outputs to images")
    p.add_argument("--input", required=True, help="input CSV (published schema)")
    p.add_argument("--kind", required=True, choices=KINDS)
    p.add_argument("--out", required=True, help="output image path (PNG)")
    p.add_argument("--interface", default=None,
                   help="interface polyline sidecar (field plots)")
    p.add_argument("--component", default="re", choices=("re", "im", "abs"))
    p.add_argument("--xlim", default=None, help="xmin,xmax")
    p.add_argument("--ylim", default=None, help="ymin,ymax")
    p.add_argument("--clim", default=None, help="cmin,cmax colormap bounds")
    return p


def _pair(text):
    a, b = (float(v) for v in text.split(","))
    return (a, b)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    spec = FigureSpec(
        kind=args.kind,
        input_path=args.input,
        output_path=args.out,
        interface_path=args.interface,
        component=args.component,
        xlim=_pair(args.xlim) if args.xlim else None,
        ylim=_pair(args.ylim) if args.ylim else None,
        clim=_pair(args.clim) if args.clim else None,
    )
    try:
        path = render(spec)
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 4
    print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
