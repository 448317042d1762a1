"""Command line front end: point at a directory of horolab artifacts
(or individual files) and write one PNG per requested kind."""

import argparse
import sys
from pathlib import Path

from .render import KINDS, PlotJob, SchemaError, render

DEFAULT_NAMES = {
    "heatmap": "report.csv",
    "residuals": "residuals.csv",
    "dual": "dual.csv",
    "mesh": "mesh.obj",
}


def build_parser():
    ap = argparse.ArgumentParser(
        prog="horolab-plots",
        description="Render figures from horolab CSV/OBJ outputs.")
    ap.add_argument("input_dir", nargs="?", default=".",
                    help="directory holding the CLI artifacts")
    ap.add_argument("-o", "--out", default="plots_out",
                    help="output image directory")
    ap.add_argument("--kinds", nargs="+", choices=KINDS, default=list(KINDS))
    ap.add_argument("--report", help="override path of the report CSV")
    ap.add_argument("--residuals", help="override path of the residual CSV")
    ap.add_argument("--dual", help="override path of the duality CSV")
    ap.add_argument("--mesh", help="override path of the OBJ mesh")
    ap.add_argument("--column", default="C",
                    help="report column for the heatmap (default C)")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    base = Path(args.input_dir)
    paths = {
        "heatmap": Path(args.report) if args.report else base / DEFAULT_NAMES["heatmap"],
        "residuals": Path(args.residuals) if args.residuals else base / DEFAULT_NAMES["residuals"],
        "dual": Path(args.dual) if args.dual else base / DEFAULT_NAMES["dual"],
        "mesh": Path(args.mesh) if args.mesh else base / DEFAULT_NAMES["mesh"],
    }
    job = PlotJob(out_dir=Path(args.out),
                  report_csv=paths["heatmap"],
                  residuals_csv=paths["residuals"],
                  dual_csv=paths["dual"],
                  mesh_obj=paths["mesh"],
                  kinds=args.kinds,
                  heatmap_column=args.column)
    try:
        written = render(job)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    for p in written:
        print(p)
    return 0


if __name__ == "__main__":
    sys.exit(main())
