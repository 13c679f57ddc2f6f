"""Command-line interface: configs, outputs, determinism, exit codes."""

import json
import os

import numpy as np
import pytest

from lakelab.cli import main
from lakelab.config import parse_config_text
from lakelab.errors import ConfigError
from lakelab.verify import (check_cfl_guard, check_circulation_roundtrip,
                            check_transport_conservation)

CONFIGS = os.path.join(os.path.dirname(__file__), "..", "configs")

MINI_SOLVE = """
[domain]
kind = disk
radius = 1.0

[depth]
law = flat
const = 1.0

[grid]
n_r = 32
n_theta = 16

[evolve]
omega0 = gaussian:0.3,0.0,0.2,1.0

[output]
dir = {out}
prefix = mini
"""

MINI_ANNULUS = """
[domain]
kind = annulus
r_in = 0.5
r_out = 1.0

[depth]
law = power
alpha = 1.0

[grid]
n_r = 128
n_theta = 32

[evolve]
bc_island = 1.0

[output]
dir = {out}
prefix = ann
"""

MINI_LIMIT = """
[domain]
kind = disk
radius = 1.0

[depth]
law = power
alpha = 1.0

[grid]
n_r = 96
n_theta = 16

[evolve]
gamma = 1.0
omega0 = zero

[study]
mode = evanescent
eps_start = 0.2
eps_count = 3
probes = 0.5,0.7
band = 0.3,0.9

[output]
dir = {out}
prefix = lim
"""


def write_cfg(tmp_path, text, name="cfg.ini"):
    p = tmp_path / name
    p.write_text(text.format(out=tmp_path / "out"))
    return str(p)


# -- config parsing ------------------------------------------------------------------

def test_unknown_section_and_key_rejected():
    with pytest.raises(ConfigError):
        parse_config_text("[bogus]\nx = 1\n")
    with pytest.raises(ConfigError):
        parse_config_text("[domain]\nbogus = 1\n")


def test_scientific_notation_and_comments():
    cfg = parse_config_text("""
# comment line
[grid]
n_r = 64        # inline comment
[evolve]
tol = 1e-8
""")
    assert cfg.get("grid", "n_r") == "64"
    spec = cfg.lake()
    assert float(cfg.get("evolve", "tol")) == 1e-8


def test_override_validation():
    cfg = parse_config_text("[domain]\nkind = disk\n")
    cfg.override("grid.n_r", "48")
    assert cfg.get("grid", "n_r") == "48"
    with pytest.raises(ConfigError):
        cfg.override("grid.bogus", "1")


def test_bad_omega_recipe():
    cfg = parse_config_text("[evolve]\nomega0 = fish:1\n")
    with pytest.raises(ConfigError):
        cfg.omega0_fn()


def test_cfl_validated_at_parse_time():
    cfg = parse_config_text("[evolve]\ncfl = 2.0\n")
    with pytest.raises(ConfigError):
        cfg.stepper()


# -- commands -------------------------------------------------------------------------

def test_cmd_solve_writes_outputs(tmp_path):
    cfgp = write_cfg(tmp_path, MINI_SOLVE)
    assert main(["solve", cfgp]) == 0
    psi = (tmp_path / "out" / "mini_psi.csv").read_text().splitlines()
    assert psi[0] == "i,j,x,y,value"
    assert len(psi) == 1 + 32 * 16
    rep = json.loads((tmp_path / "out" / "mini_solve.json").read_text())
    assert set(rep) == {"iterations", "residual", "energy"}
    assert rep["residual"] <= 1e-10


def test_cmd_harmonic_energy_value(tmp_path):
    cfgp = write_cfg(tmp_path, MINI_ANNULUS)
    assert main(["harmonic", cfgp]) == 0
    rep = json.loads((tmp_path / "out" / "ann_basis.json").read_text())
    assert rep["energy_phi"] == pytest.approx(4 * np.pi, rel=1e-2)
    assert rep["a_scal"] == pytest.approx(-1 / (4 * np.pi), rel=1e-2)


def test_cmd_capacity_flat_value(tmp_path):
    cfgp = write_cfg(tmp_path, MINI_SOLVE)
    code = main(["capacity", cfgp, "--set", "depth.law=flat",
                 "--set", "study.radii=0.25", "--set", "grid.n_r=192",
                 "--set", "grid.grading=geometric",
                 "--set", "domain.kind=disk"])
    assert code == 0
    rep = json.loads((tmp_path / "out" / "mini_capacity.json").read_text())
    assert rep["capacity"][0] == pytest.approx(4.5324, rel=2e-2)


def test_cmd_limit_report_shape(tmp_path):
    cfgp = write_cfg(tmp_path, MINI_LIMIT, "lim.ini")
    assert main(["limit", cfgp]) == 0
    lines = (tmp_path / "out" / "lim_report.csv").read_text().splitlines()
    assert lines[0].startswith("eps,island_radius,dist_v,dist_phi,capacity")
    assert len(lines) == 1 + 3 + 1  # three eps rows plus the limit row
    summary = json.loads((tmp_path / "out" / "lim_summary.json").read_text())
    assert summary["mode"] == "evanescent"
    assert summary["dirac_strength"] == pytest.approx(1.0, abs=1e-2)
    assert all(summary["passed_checks"].values())


def test_cmd_evolve_snapshot_at_t0(tmp_path):
    cfgp = write_cfg(tmp_path, MINI_SOLVE)
    code = main(["evolve", cfgp, "--set", "evolve.t_final=0.0"])
    assert code == 0
    ts = (tmp_path / "out" / "mini_timeseries.csv").read_text().splitlines()
    assert ts[0] == "t,mass,max_omega,min_omega,gamma,energy"
    assert len(ts) == 2  # header + single t=0 snapshot
    rep = json.loads((tmp_path / "out" / "mini_evolve.json").read_text())
    assert rep["snapshots"] == 1


def test_byte_identical_reruns(tmp_path):
    cfgp = write_cfg(tmp_path, MINI_LIMIT, "lim.ini")
    assert main(["limit", cfgp]) == 0
    first = (tmp_path / "out" / "lim_report.csv").read_bytes()
    first_json = (tmp_path / "out" / "lim_summary.json").read_bytes()
    assert main(["limit", cfgp]) == 0
    assert (tmp_path / "out" / "lim_report.csv").read_bytes() == first
    assert (tmp_path / "out" / "lim_summary.json").read_bytes() == first_json


def test_exit_codes(tmp_path, capsys):
    assert main(["solve", str(tmp_path / "missing.ini")]) == 2
    err = json.loads(capsys.readouterr().err)
    assert err["kind"] == "config"
    bad = tmp_path / "bad.ini"
    bad.write_text("[domain]\nbogus = 1\n")
    assert main(["solve", str(bad)]) == 2
    capsys.readouterr()
    # solver failure: tolerance below what float64 CG can certify
    cfgp = write_cfg(tmp_path, MINI_ANNULUS)
    code = main(["solve", cfgp, "--set", "evolve.tol=1e-30"])
    assert code == 3
    err = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert err["kind"] == "solver"


def test_shipped_configs_parse():
    for name in os.listdir(CONFIGS):
        cfg = parse_config_text(open(os.path.join(CONFIGS, name)).read())
        cfg.lake()  # validates domain + depth combinations


# -- verify fixtures -------------------------------------------------------------------

def test_verify_passes_by_default():
    assert check_transport_conservation().passed
    assert check_circulation_roundtrip().passed


def test_verify_flags_missigned_circulation():
    res = check_circulation_roundtrip(flip_sign=-1.0)
    assert not res.passed
    assert "circulation_roundtrip" in res.name


def test_verify_surfaces_timestep_guard():
    res = check_cfl_guard(cfl=2.0)
    assert res.passed and "TimeStepTooLarge" in res.expected


def test_seeded_random_omega_recipe(tmp_path):
    cfgp = write_cfg(tmp_path, MINI_SOLVE)
    args = ["evolve", cfgp, "--set", "evolve.omega0=random:3,0.5",
            "--set", "evolve.t_final=0.0"]
    assert main(args + ["--set", "evolve.seed=7"]) == 0
    first = (tmp_path / "out" / "mini_timeseries.csv").read_bytes()
    assert main(args + ["--set", "evolve.seed=7"]) == 0
    assert (tmp_path / "out" / "mini_timeseries.csv").read_bytes() == first
    assert main(args + ["--set", "evolve.seed=8"]) == 0
    assert (tmp_path / "out" / "mini_timeseries.csv").read_bytes() != first


def test_sequence_section_and_T_key_accepted(tmp_path):
    text = MINI_LIMIT.replace("[study]", "[sequence]")
    cfgp = write_cfg(tmp_path, text, "alias.ini")
    assert main(["limit", cfgp]) == 0
    cfg2 = parse_config_text("[evolve]\nT = 0.25\n")
    assert float(cfg2.get("evolve", "t_final")) == 0.25


def test_tabulated_depth_from_csv(tmp_path):
    # regular lattice covering the disk: b = 0.5 + x^2 + y^2
    n = 41
    xs = np.linspace(-1.1, 1.1, n)
    rows = ["i,j,x,y,value"]
    for i, x in enumerate(xs):
        for j, y in enumerate(xs):
            rows.append(f"{i},{j},{float(x)!r},{float(y)!r},{float(0.5 + x * x + y * y)!r}")
    table = tmp_path / "depth.csv"
    table.write_text("\n".join(rows) + "\n")
    cfgp = write_cfg(tmp_path, MINI_SOLVE)
    code = main(["solve", cfgp, "--set", "depth.law=tabulated",
                 "--set", f"depth.table_csv={table}"])
    assert code == 0
    # polar-grid field CSVs are not regular lattices and must be rejected
    bad = parse_config_text(f"[depth]\nlaw = tabulated\ntable_csv = {tmp_path}/out/mini_psi.csv\n")
    from lakelab.errors import ConfigError as CE
    with pytest.raises(CE):
        bad.depth_law()


def test_masked_domain_from_csv(tmp_path):
    from lakelab import disk_mask
    mask, h, orig = disk_mask(24)
    mask_csv = tmp_path / "mask.csv"
    np.savetxt(mask_csv, mask.astype(int), fmt="%d", delimiter=",")
    cfgp = write_cfg(tmp_path, MINI_SOLVE)
    code = main(["solve", cfgp, "--set", "domain.kind=masked",
                 "--set", f"domain.mask_csv={mask_csv}"])
    assert code == 0
    psi = (tmp_path / "out" / "mini_psi.csv").read_text().splitlines()
    assert len(psi) == 1 + int(mask.sum())
