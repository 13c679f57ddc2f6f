"""Deterministic CSV/JSON writers for fields, time series and study reports.

All floats are written as ``%.12e`` and JSON keys are sorted, so identical
inputs produce byte-identical files.
"""

from __future__ import annotations

import json
import os

import numpy as np

from .grid import Grid
from .limits import ConvergenceReport

__all__ = ["write_field_csv", "write_csv", "write_json", "report_to_csv",
           "report_summary", "timeseries_csv"]


def _f(x) -> str:
    return "%.12e" % float(x)


def write_csv(path, header, rows):
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(str(c) if isinstance(c, (str, int)) else _f(c)
                              for c in row) + "\n")


def write_json(path, obj):
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(json.dumps(obj, indent=2, sort_keys=True))
        fh.write("\n")


def write_field_csv(path, grid: Grid, values):
    """Cell field as rows (i, j, x, y, value)."""
    values = np.asarray(values, dtype=float)
    rows = [(int(grid.cell_ij[k, 0]), int(grid.cell_ij[k, 1]),
             grid.cell_x[k], grid.cell_y[k], values[k])
            for k in range(grid.n_cells)]
    write_csv(path, ["i", "j", "x", "y", "value"], rows)


def timeseries_csv(path, diagnostics):
    write_csv(path, ["t", "mass", "max_omega", "min_omega", "gamma", "energy"],
              [(d["t"], d["mass"], d["max_omega"], d["min_omega"], d["gamma"],
                d["energy"]) for d in diagnostics])


def report_to_csv(report: ConvergenceReport, path, probes):
    probes = list(probes)
    header = ["eps", "island_radius", "dist_v"]
    if report.mode == "evanescent":
        header += ["dist_phi", "capacity", "energy_phi", "alpha"]
    header += ["velocity_energy", "gamma"]
    header += [f"probe_{rho:g}" for rho in probes]
    rows = []
    for r in report.rows:
        row = [r.eps, r.island_radius, r.dist_v]
        if report.mode == "evanescent":
            row += [r.dist_phi, r.capacity, r.energy_phi, r.alpha]
        row += [r.velocity_energy, r.gamma_measured]
        row += [(_f(r.probe_circulations[rho]) if rho in r.probe_circulations else "")
                for rho in probes]
        rows.append(row)
    # limit row: eps = 0 with the closed-form reference values where known
    lim = report.limit

    def opt(v):
        return "" if v is None else _f(v)

    row = [0.0, 0.0, 0.0]
    if report.mode == "evanescent":
        row += ["", opt(lim["capacity"]), opt(lim["capacity"]), opt(lim["alpha"])]
    row += ["", _f(report.gamma if report.mode == "evanescent" else 0.0)]
    row += [_f(lim["probe_expected"][rho]) for rho in probes]
    rows.append(row)
    write_csv(path, header, rows)


def report_summary(report: ConvergenceReport) -> dict:
    return {
        "mode": report.mode,
        "gamma": report.gamma,
        "limit_capacity": report.limit["capacity"],
        "dirac_strength": report.dirac_strength,
        "passed_checks": {k: bool(v) for k, v in report.checks.items()},
        "eps": [r.eps for r in report.rows],
        "dist_v": [r.dist_v for r in report.rows],
        "capacity": [r.capacity for r in report.rows],
    }
