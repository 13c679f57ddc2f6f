"""Generate every figure a report directory supports.

Usage: ``lakelab-plots REPORT_DIR [--out FIG_DIR]``. Convergence curves and
probe plots come from ``*_report.csv`` + ``*_summary.json`` pairs, the
capacity overlay from ``*_capacity.csv`` files (a power-law / flat pair) and
heatmaps from any other ``*.csv`` field exports.
"""

from __future__ import annotations

import argparse
import os
import sys

from .bundle import PlotError, find_bundles
from .convergence import plot_capacity_dichotomy, plot_convergence, plot_probe_circulations
from .fields import plot_fields


def generate_all(report_dir: str, fig_dir: str):
    written = []
    for bundle in find_bundles(report_dir, fig_dir):
        written += plot_convergence(bundle)
        written += plot_probe_circulations(bundle)

    caps = sorted(f for f in os.listdir(report_dir) if f.endswith("_capacity.csv"))
    power = [f for f in caps if "flat" not in f]
    flat = [f for f in caps if "flat" in f]
    if power and flat:
        files, _ = plot_capacity_dichotomy(os.path.join(report_dir, power[0]),
                                           os.path.join(report_dir, flat[0]),
                                           fig_dir)
        written += files

    for name in sorted(os.listdir(report_dir)):
        if not name.endswith(".csv") or name.endswith("_report.csv") \
                or name.endswith("_capacity.csv") or name.endswith("_timeseries.csv"):
            continue
        written += plot_fields(os.path.join(report_dir, name), fig_dir)
    return written


def main(argv=None) -> int:
    p = argparse.ArgumentParser(prog="lakelab-plots",
                                description="figures from lakelab reports")
    p.add_argument("report_dir")
    p.add_argument("--out", default=None, help="figure directory (default: REPORT_DIR/figures)")
    args = p.parse_args(argv)
    fig_dir = args.out or os.path.join(args.report_dir, "figures")
    try:
        written = generate_all(args.report_dir, fig_dir)
    except PlotError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    for f in written:
        print(f)
    return 0


if __name__ == "__main__":
    sys.exit(main())
