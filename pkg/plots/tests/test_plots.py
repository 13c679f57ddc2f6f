"""Figure generation from the shipped report fixtures."""

import os
import shutil

import numpy as np
import pytest

from lakeplots import PlotError, ReportBundle, plot_capacity_dichotomy, plot_fields
from lakeplots.bundle import find_bundles, read_columns
from lakeplots.cli import generate_all, main
from lakeplots.convergence import plot_convergence, plot_probe_circulations

FIXTURES = os.path.join(os.path.dirname(__file__), "fixtures")


def bundle_for(tmp_path, stem="dirac"):
    return ReportBundle(os.path.join(FIXTURES, f"{stem}_report.csv"),
                        os.path.join(FIXTURES, f"{stem}_summary.json"),
                        str(tmp_path))


# -- bundle validation -----------------------------------------------------------

def test_bundle_rejects_missing_files(tmp_path):
    with pytest.raises(PlotError):
        ReportBundle(str(tmp_path / "nope.csv"), str(tmp_path / "nope.json"),
                     str(tmp_path))


def test_bundle_rejects_non_decreasing_eps(tmp_path):
    bad = tmp_path / "x_report.csv"
    bad.write_text("eps,dist_v\n0.1,1.0\n0.2,0.5\n")
    summ = tmp_path / "x_summary.json"
    summ.write_text("{}")
    with pytest.raises(PlotError):
        ReportBundle(str(bad), str(summ), str(tmp_path))


def test_single_row_report_rejected_for_plotting(tmp_path):
    one = tmp_path / "y_report.csv"
    one.write_text("eps,dist_v\n0.1,1.0\n")
    summ = tmp_path / "y_summary.json"
    summ.write_text("{}")
    b = ReportBundle(str(one), str(summ), str(tmp_path))
    with pytest.raises(PlotError):
        plot_convergence(b)


def test_missing_column_named_in_error(tmp_path):
    b = bundle_for(tmp_path)
    with pytest.raises(PlotError, match="no_such_column"):
        b.series("no_such_column")


# -- convergence figures ------------------------------------------------------------

def test_convergence_figures_from_fixture(tmp_path):
    b = bundle_for(tmp_path)
    files = plot_convergence(b)
    assert any(f.endswith("dirac_capacity.png") for f in files)
    assert any(f.endswith(".svg") for f in files)
    for f in files:
        assert os.path.getsize(f) > 0


def test_probe_figure(tmp_path):
    b = bundle_for(tmp_path)
    files = plot_probe_circulations(b)
    assert len(files) == 2


def test_emergent_fixture_plots(tmp_path):
    b = bundle_for(tmp_path, "emergent_raised")
    files = plot_convergence(b)
    assert files


# -- capacity dichotomy ----------------------------------------------------------------

def test_capacity_dichotomy_two_curves_with_limits(tmp_path):
    files, info = plot_capacity_dichotomy(
        os.path.join(FIXTURES, "capacity_power_capacity.csv"),
        os.path.join(FIXTURES, "capacity_flat_capacity.csv"), str(tmp_path))
    assert len(files) == 2
    assert info["n_curves"] == 2
    # documented limits: power-law curve pinned above 2 pi, flat curve
    # heading to zero
    assert info["power_last"] == pytest.approx(2 * np.pi, rel=2e-2)
    assert info["power_last"] > info["power_limit"]
    assert info["flat_last"] < 0.25 * read_columns(
        os.path.join(FIXTURES, "capacity_flat_capacity.csv"))["capacity"][0] * 2
    assert info["flat_last"] == pytest.approx(2 * np.pi / np.log(128), rel=2e-2)


# -- field heatmaps -----------------------------------------------------------------------

def test_field_heatmap(tmp_path):
    files = plot_fields(os.path.join(FIXTURES, "field_phi_psi.csv"), str(tmp_path))
    assert len(files) == 2
    assert all(os.path.getsize(f) > 0 for f in files)


def test_field_heatmap_rejects_empty(tmp_path):
    empty = tmp_path / "empty.csv"
    empty.write_text("i,j,x,y,value\n")
    with pytest.raises(PlotError):
        plot_fields(str(empty), str(tmp_path))


# -- full regeneration + determinism --------------------------------------------------------

def test_cli_regenerates_all_fixture_figures(tmp_path):
    code = main([FIXTURES, "--out", str(tmp_path / "figs")])
    assert code == 0
    names = sorted(os.listdir(tmp_path / "figs"))
    assert "capacity_dichotomy.png" in names
    assert any(n.startswith("dirac_") for n in names)
    assert any(n.startswith("emergent_raised_") for n in names)
    assert any(n.startswith("field_phi_psi") for n in names)


def test_figures_byte_identical_across_runs(tmp_path):
    d1, d2 = tmp_path / "a", tmp_path / "b"
    generate_all(FIXTURES, str(d1))
    generate_all(FIXTURES, str(d2))
    names = sorted(os.listdir(d1))
    assert names == sorted(os.listdir(d2))
    for n in names:
        assert (d1 / n).read_bytes() == (d2 / n).read_bytes(), n


def test_cli_error_on_empty_directory(tmp_path, capsys):
    empty = tmp_path / "none"
    empty.mkdir()
    code = main([str(empty)])
    # nothing to plot is not an error: an empty manifest is printed
    assert code == 0
    assert capsys.readouterr().out == ""
