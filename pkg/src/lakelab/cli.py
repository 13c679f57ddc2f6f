"""Command-line entry point: solve, harmonic, capacity, evolve, limit, verify.

Every command takes a config file (see :mod:`lakelab.config` for the
grammar); ``--set section.key=value`` overrides single keys and ``--out``
redirects the output directory. Exit codes: 0 ok, 2 config error, 3 solver
error, 4 invariant failure. Errors are reported as one JSON object on
stderr.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import config as cfgmod
from .elliptic import BoundaryValues, assemble, solve
from .errors import ConfigError, InvalidDepth, InvalidSequence, LakeError
from .fields import sample_depth
from .hodge import capacity, capacity_floor, harmonic_basis
from .limits import run_study
from .reports import (report_summary, report_to_csv, timeseries_csv,
                      write_field_csv, write_json)
from .transport import evolve, flow_diagnostics, initial_state
from .verify import run_suite

__all__ = ["main"]


def _load(args) -> cfgmod.RunConfig:
    cfg = cfgmod.parse_config(args.config)
    for item in args.set or []:
        key, _, val = item.partition("=")
        if not val:
            raise ConfigError(f"--set needs section.key=value, got {item!r}")
        cfg.override(key.strip(), val.strip())
    return cfg


def cmd_solve(args) -> int:
    cfg = _load(args)
    spec = cfg.lake()
    grid = cfg.grid(spec)
    depth = sample_depth(spec, grid)
    island = cfg.get("evolve", "bc_island")
    bc = BoundaryValues(outer=float(cfg.get("evolve", "bc_outer", "0.0")),
                        island=(float(island) if island is not None
                                else (0.0 if grid.has_island() else None)))
    om = cfg.omega0_fn()
    f = None if om is None else depth.b_cell * om(grid.cell_x, grid.cell_y)
    psi, report = solve(assemble(depth, grid, bc), f=f,
                        tol=float(cfg.get("evolve", "tol")))
    write_field_csv(cfg.out_path("psi.csv", args.out), grid, psi)
    write_json(cfg.out_path("solve.json", args.out), report.to_dict())
    return 0


def cmd_harmonic(args) -> int:
    cfg = _load(args)
    spec = cfg.lake()
    grid = cfg.grid(spec)
    basis = harmonic_basis(spec, grid, tol=float(cfg.get("evolve", "tol")))
    write_field_csv(cfg.out_path("phi1.csv", args.out), grid, basis.phi1)
    write_json(cfg.out_path("basis.json", args.out),
               {"energy_phi": basis.energy_phi, "a_scal": basis.a_scal,
                "capacity": basis.capacity})
    return 0


def cmd_capacity(args) -> int:
    cfg = _load(args)
    spec = cfg.lake()
    radii = cfg._list("study", "radii")
    if not radii:
        raise ConfigError("capacity needs study.radii (comma-separated)")
    n_r = int(float(cfg.get("grid", "n_r")))
    n_theta = int(float(cfg.get("grid", "n_theta")))
    grading = cfg.get("grid", "grading")
    caps = [capacity(spec, r, n_r=n_r, n_theta=n_theta, grading=grading)
            for r in radii]
    floor = capacity_floor(spec)
    from .reports import write_csv
    write_csv(cfg.out_path("capacity.csv", args.out),
              ["radius", "capacity", "floor"],
              [(r, c, floor) for r, c in zip(radii, caps)])
    write_json(cfg.out_path("capacity.json", args.out),
               {"radii": radii, "capacity": caps, "floor": floor})
    return 0


def cmd_evolve(args) -> int:
    cfg = _load(args)
    spec = cfg.lake()
    grid = cfg.grid(spec)
    depth = sample_depth(spec, grid)
    basis = harmonic_basis(spec, grid, depth) if grid.has_island() else None
    om = cfg.omega0_fn()
    om0 = np.zeros(grid.n_cells) if om is None else om(grid.cell_x, grid.cell_y)
    gamma = float(cfg.get("evolve", "gamma"))
    tol = float(cfg.get("evolve", "tol"))
    state0 = initial_state(spec, grid, depth, basis, om0, gamma, tol=tol)
    snaps = evolve(state0, float(cfg.get("evolve", "t_final")), spec, grid, depth,
                   basis, gamma, cfg.stepper(),
                   snapshot_every=int(float(cfg.get("evolve", "snapshot_every"))),
                   tol=tol)
    diags = [flow_diagnostics(s, grid, depth) for s in snaps]
    timeseries_csv(cfg.out_path("timeseries.csv", args.out), diags)
    write_field_csv(cfg.out_path("omega_final.csv", args.out), grid, snaps[-1].omega)
    write_json(cfg.out_path("evolve.json", args.out),
               {"snapshots": len(snaps), "t_final": snaps[-1].t,
                "initial": diags[0], "final": diags[-1]})
    return 0


def cmd_limit(args) -> int:
    cfg = _load(args)
    spec = cfg.lake()
    study = cfg.study(spec)
    report = run_study(study)
    report_to_csv(report, cfg.out_path("report.csv", args.out), study.probes)
    write_json(cfg.out_path("summary.json", args.out), report_summary(report))
    return 0 if report.passed else 4


def cmd_verify(args) -> int:
    results = run_suite()
    for r in results:
        print(r.row())
    n_fail = sum(not r.passed for r in results)
    print(f"{len(results) - n_fail}/{len(results)} checks passed")
    if args.config:
        cfg = _load(args)
        write_json(cfg.out_path("verify.json", args.out),
                   {r.name: {"passed": r.passed, "measured": r.measured,
                             "expected": r.expected} for r in results})
    return 0 if n_fail == 0 else 4


_COMMANDS = {
    "solve": cmd_solve,
    "harmonic": cmd_harmonic,
    "capacity": cmd_capacity,
    "evolve": cmd_evolve,
    "limit": cmd_limit,
    "verify": cmd_verify,
}


def _parser():
    p = argparse.ArgumentParser(prog="lakelab",
                                description="numerical laboratory for degenerate lake flows")
    sub = p.add_subparsers(dest="command", required=True)
    for name, fn in _COMMANDS.items():
        sp = sub.add_parser(name)
        if name == "verify":
            sp.add_argument("config", nargs="?", default=None)
        else:
            sp.add_argument("config")
        sp.add_argument("--out", default=None, help="override output directory")
        sp.add_argument("--set", action="append", metavar="SEC.KEY=VAL",
                        help="override a config value")
        sp.set_defaults(fn=fn)
    return p


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        return args.fn(args)
    except (ConfigError, InvalidDepth, InvalidSequence) as e:
        print(json.dumps({"kind": "config", "message": str(e)}), file=sys.stderr)
        return 2
    except LakeError as e:
        print(json.dumps({"kind": "solver", "message": str(e)}), file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
