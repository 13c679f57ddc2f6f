"""Heatmaps of exported cell fields (i, j, x, y, value)."""

from __future__ import annotations

import csv
import os

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import matplotlib.tri as mtri
import numpy as np

from .bundle import PlotError

matplotlib.rcParams["svg.hashsalt"] = "lakeplots"


def read_field_csv(path: str):
    if not os.path.exists(path):
        raise PlotError(f"field CSV not found: {path}")
    xs, ys, vs = [], [], []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"x", "y", "value"} <= set(reader.fieldnames):
            raise PlotError(f"field CSV needs columns i,j,x,y,value: {path}")
        for row in reader:
            xs.append(float(row["x"]))
            ys.append(float(row["y"]))
            vs.append(float(row["value"]))
    if len(xs) < 3:
        raise PlotError(f"field CSV has too few cells to triangulate: {path}")
    return np.array(xs), np.array(ys), np.array(vs)


def plot_fields(field_csv: str, fig_dir: str, cmap: str = "viridis"):
    """Triangulated heatmap of a cell field; writes PNG and SVG."""
    x, y, v = read_field_csv(field_csv)
    os.makedirs(fig_dir, exist_ok=True)
    tri = mtri.Triangulation(x, y)
    fig, ax = plt.subplots(figsize=(4.4, 4.0))
    im = ax.tripcolor(tri, v, shading="gouraud", cmap=cmap)
    ax.set_aspect("equal")
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    fig.colorbar(im, ax=ax, shrink=0.85)
    stem = os.path.splitext(os.path.basename(field_csv))[0]
    ax.set_title(stem)
    fig.tight_layout()
    files = []
    for ext in ("png", "svg"):
        path = os.path.join(fig_dir, f"{stem}.{ext}")
        fig.savefig(path, dpi=150, metadata={"Date": None} if ext == "svg" else None)
        files.append(path)
    plt.close(fig)
    return files
