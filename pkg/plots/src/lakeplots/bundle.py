"""Report bundles: locate and validate study outputs before plotting."""

from __future__ import annotations

import csv
import json
import os
from dataclasses import dataclass, field


class PlotError(Exception):
    """Missing or malformed report data."""


@dataclass
class ReportBundle:
    """Paths to one study's report CSV and summary JSON plus a figure dir.

    Parsing is eager: the constructor rejects missing files, malformed rows
    and non-decreasing positive eps columns.
    """

    report_csv: str
    summary_json: str
    fig_dir: str
    columns: dict = field(init=False, default_factory=dict)
    summary: dict = field(init=False, default_factory=dict)

    def __post_init__(self):
        for path in (self.report_csv, self.summary_json):
            if not os.path.exists(path):
                raise PlotError(f"report file not found: {path}")
        self.columns = read_columns(self.report_csv)
        with open(self.summary_json, encoding="utf-8") as fh:
            self.summary = json.load(fh)
        eps = [e for e in self.columns.get("eps", []) if e is not None]
        eps = [e for e in eps if e > 0.0]
        if len(eps) < 1:
            raise PlotError(f"no positive eps rows in {self.report_csv}")
        if any(b >= a for a, b in zip(eps, eps[1:])):
            raise PlotError(f"eps column is not strictly decreasing in {self.report_csv}")
        os.makedirs(self.fig_dir, exist_ok=True)

    @property
    def name(self) -> str:
        base = os.path.basename(self.report_csv)
        return base.replace("_report.csv", "")

    def series(self, column: str):
        """(eps, value) pairs over rows where both entries are present and
        the row belongs to the eps sequence (the closed-form limit row with
        eps = 0 is excluded)."""
        if column not in self.columns:
            raise PlotError(f"column {column!r} missing from {self.report_csv}")
        eps, vals = [], []
        for e, v in zip(self.columns["eps"], self.columns[column]):
            if e is None or v is None or e <= 0.0:
                continue
            eps.append(e)
            vals.append(v)
        if len(eps) < 2:
            raise PlotError(f"need >= 2 rows to plot {column!r}, got {len(eps)}")
        return eps, vals


def read_columns(path: str) -> dict:
    """Numeric CSV columns as lists (empty cells become None)."""
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise PlotError(f"empty CSV: {path}") from None
        cols = {name: [] for name in header}
        for row in reader:
            if not row or all(not c for c in row):
                continue
            if len(row) != len(header):
                raise PlotError(f"ragged row in {path}: {row}")
            for name, cell in zip(header, row):
                cols[name].append(float(cell) if cell not in ("", "nan") else None)
    if not cols:
        raise PlotError(f"no columns in {path}")
    return cols


def find_bundles(report_dir: str, fig_dir: str):
    """All (report CSV, summary JSON) pairs under a report directory."""
    bundles = []
    for name in sorted(os.listdir(report_dir)):
        if not name.endswith("_report.csv"):
            continue
        stem = name[: -len("_report.csv")]
        summary = os.path.join(report_dir, f"{stem}_summary.json")
        bundles.append(ReportBundle(os.path.join(report_dir, name), summary, fig_dir))
    return bundles
