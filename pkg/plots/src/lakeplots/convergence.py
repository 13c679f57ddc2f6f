"""Convergence curves over eps and the capacity-dichotomy overlay."""

from __future__ import annotations

import os

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .bundle import PlotError, ReportBundle, read_columns

# deterministic SVG ids; no timestamps in metadata
matplotlib.rcParams["svg.hashsalt"] = "lakeplots"

_METRICS = ("dist_v", "dist_phi", "capacity", "energy_phi", "alpha",
            "velocity_energy")


def _save(fig, path_base):
    paths = []
    for ext in ("png", "svg"):
        path = f"{path_base}.{ext}"
        fig.savefig(path, dpi=150, metadata={"Date": None} if ext == "svg" else None)
        paths.append(path)
    plt.close(fig)
    return paths


def plot_convergence(bundle: ReportBundle):
    """One log-log figure per metric column present in the report; returns
    the list of files written."""
    written = []
    for metric in _METRICS:
        if metric not in bundle.columns:
            continue
        try:
            eps, vals = bundle.series(metric)
        except PlotError:
            raise
        fig, ax = plt.subplots(figsize=(4.2, 3.2))
        ax.loglog(eps, np.abs(vals), marker="o", color="#1f5fa8")
        ax.set_xlabel(r"$\varepsilon$")
        ax.set_ylabel(metric.replace("_", " "))
        ax.grid(True, which="both", alpha=0.3)
        ax.set_title(f"{bundle.name}: {metric}")
        fig.tight_layout()
        written += _save(fig, os.path.join(bundle.fig_dir,
                                           f"{bundle.name}_{metric}"))
    if not written:
        raise PlotError(f"no plottable metric columns in {bundle.report_csv}")
    return written


def plot_probe_circulations(bundle: ReportBundle):
    """Measured probe circulation against radius for the finest eps, with the
    expected limit values from the closed-form row."""
    probes = sorted(c for c in bundle.columns if c.startswith("probe_"))
    if not probes:
        raise PlotError(f"no probe columns in {bundle.report_csv}")
    radii = [float(c.split("_", 1)[1]) for c in probes]
    eps = bundle.columns["eps"]
    finest = min((i for i, e in enumerate(eps) if e and e > 0.0),
                 key=lambda i: eps[i])
    limit_row = next((i for i, e in enumerate(eps) if not e or e == 0.0), None)
    fig, ax = plt.subplots(figsize=(4.2, 3.2))
    got = [bundle.columns[c][finest] for c in probes]
    ax.plot(radii, got, marker="o", color="#1f5fa8", label="measured")
    if limit_row is not None:
        exp = [bundle.columns[c][limit_row] for c in probes]
        ax.plot(radii, exp, marker="x", linestyle="--", color="#a83232",
                label="limit")
    ax.set_xlabel(r"probe radius $\rho$")
    ax.set_ylabel("circulation")
    ax.legend()
    ax.grid(True, alpha=0.3)
    ax.set_title(f"{bundle.name}: probe circulations")
    fig.tight_layout()
    return _save(fig, os.path.join(bundle.fig_dir, f"{bundle.name}_probes"))


def plot_capacity_dichotomy(power_csv: str, flat_csv: str, fig_dir: str,
                            alpha: float = 1.0):
    """Overlay the two capacity curves: the power-law bottom stays above its
    positive limit 2 pi alpha while the flat bottom sinks to zero."""
    os.makedirs(fig_dir, exist_ok=True)
    cols_p = read_columns(power_csv)
    cols_f = read_columns(flat_csv)
    for cols, path in ((cols_p, power_csv), (cols_f, flat_csv)):
        if "radius" not in cols or "capacity" not in cols:
            raise PlotError(f"capacity CSV needs radius,capacity columns: {path}")
    fig, ax = plt.subplots(figsize=(4.6, 3.4))
    ax.semilogx(cols_p["radius"], cols_p["capacity"], marker="o",
                color="#1f5fa8", label="power-law bottom")
    ax.semilogx(cols_f["radius"], cols_f["capacity"], marker="s",
                color="#a83232", label="flat bottom")
    ax.axhline(2 * np.pi * alpha, color="#1f5fa8", linestyle=":", linewidth=1)
    ax.axhline(0.0, color="#a83232", linestyle=":", linewidth=1)
    ax.set_xlabel("island radius")
    ax.set_ylabel("weighted capacity")
    ax.legend()
    ax.grid(True, which="both", alpha=0.3)
    ax.set_title("capacity of a shrinking island")
    fig.tight_layout()
    info = {
        "n_curves": sum(1 for line in ax.lines if line.get_marker() in ("o", "s")),
        "power_last": cols_p["capacity"][-1],
        "flat_last": cols_f["capacity"][-1],
        "power_limit": 2 * np.pi * alpha,
        "flat_limit": 0.0,
    }
    files = _save(fig, os.path.join(fig_dir, "capacity_dichotomy"))
    return files, info
