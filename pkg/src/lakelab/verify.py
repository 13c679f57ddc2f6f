"""Invariant suite behind the ``verify`` command.

Each check exercises one of the structural properties the solvers are built
around (exact conservation, symmetry, maximum principles, circulation
round-trips, capacity monotonicity, ...) on small fixtures and reports
measured against expected. The suite is the programmatic counterpart of the
pytest suite, sized to run in seconds.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .elliptic import BoundaryValues, assemble, solve
from .errors import LakeError
from .fields import sample_depth, weighted_norm
from .geometry import (Annulus, CutoffChi, Disk, Flat, LakeSpec, PowerRadial,
                       make_eps_sequence)
from .grid import cartesian_masked_grid, disk_mask, polar_grid
from .hodge import (capacity, capacity_floor, default_cutoff,
                    generalized_circulation, harmonic_basis, probe_circulation,
                    reconstruct_velocity)
from .limits import StudySpec, run_study
from .transport import TimeStepper, evolve, flow_diagnostics, initial_state

__all__ = ["CheckResult", "run_suite", "ALL_CHECKS"]


@dataclass
class CheckResult:
    name: str
    passed: bool
    measured: float
    expected: str

    def row(self):
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name:40s} " \
               f"measured={self.measured:.3e}  expected {self.expected}"


def _result(name, measured, bound, expected=None):
    return CheckResult(name=name, passed=bool(measured <= bound),
                       measured=float(measured),
                       expected=expected or f"<= {bound:.1e}")


# -- geometry ---------------------------------------------------------------

def check_cell_areas():
    g = polar_grid(48, 24, 0.3, 1.0)
    err = abs(g.cell_area.sum() - g.ref_area) / g.ref_area
    mask, h, orig = disk_mask(24)
    gm = cartesian_masked_grid(mask, h, orig)
    err = max(err, abs(gm.cell_area.sum() - gm.ref_area) / gm.ref_area)
    return _result("geometry.cell_area_identity", err, 1e-12)


def check_face_depth_between_cells():
    spec = LakeSpec(domain=Annulus(0.25, 1.0), depth_law=PowerRadial(1.3))
    g = polar_grid(32, 16, 0.25, 1.0)
    d = sample_depth(spec, g)
    inter = g.interior_faces
    lo = np.minimum(d.b_cell[g.face_cell_a[inter]], d.b_cell[g.face_cell_b[inter]])
    hi = np.maximum(d.b_cell[g.face_cell_a[inter]], d.b_cell[g.face_cell_b[inter]])
    viol = np.maximum(lo - d.b_face[inter], d.b_face[inter] - hi).max()
    return _result("geometry.face_depth_between_cells", max(viol, 0.0), 1e-14)


def check_norm_homogeneity():
    spec = LakeSpec(domain=Annulus(0.25, 1.0), depth_law=PowerRadial(0.7))
    g = polar_grid(24, 12, 0.25, 1.0)
    d = sample_depth(spec, g)
    rng = np.random.default_rng(7)
    f = rng.normal(size=g.n_cells)
    c = -3.7
    n1 = weighted_norm(c * f, "1/b", g, d)
    n2 = abs(c) * weighted_norm(f, "1/b", g, d)
    return _result("geometry.norm_homogeneity", abs(n1 - n2) / n2, 1e-14)


def check_island_nestedness():
    base = LakeSpec(domain=Disk(1.0), depth_law=PowerRadial(1.0))
    members = make_eps_sequence(base, "evanescent", [0.4, 0.2, 0.1])
    radii = [m.domain.r_in for m in members]
    ok = all(b < a for a, b in zip(radii, radii[1:]))
    return CheckResult("geometry.island_nestedness", ok,
                       float(min(a - b for a, b in zip(radii, radii[1:]))), "> 0")


# -- elliptic ----------------------------------------------------------------

def check_operator_symmetry():
    spec = LakeSpec(domain=Annulus(0.2, 1.0), depth_law=PowerRadial(0.8))
    g = polar_grid(32, 16, 0.2, 1.0)
    op = assemble(sample_depth(spec, g), g, BoundaryValues(0.0, 1.0))
    rng = np.random.default_rng(3)
    u, w = rng.normal(size=(2, g.n_cells))
    a1 = float(u @ (op.matrix @ w))
    a2 = float(w @ (op.matrix @ u))
    return _result("elliptic.operator_symmetry", abs(a1 - a2) / max(abs(a1), 1e-30), 1e-13)


def check_energy_identity():
    spec = LakeSpec(domain=Annulus(0.25, 1.0), depth_law=PowerRadial(1.0))
    g = polar_grid(64, 16, 0.25, 1.0)
    op = assemble(sample_depth(spec, g), g, BoundaryValues(0.0, 1.0))
    phi, rep = solve(op, tol=1e-12)
    err = abs(op.face_energy(phi) - op.matrix_energy(phi)) / rep.energy
    return _result("elliptic.energy_identity", err, 1e-12)


def check_maximum_principle():
    spec = LakeSpec(domain=Annulus(0.2, 1.0), depth_law=PowerRadial(1.5))
    g = polar_grid(48, 24, 0.2, 1.0)
    op = assemble(sample_depth(spec, g), g, BoundaryValues(0.0, 1.0))
    phi, _ = solve(op, tol=1e-12)
    over = max(float(phi.max()) - 1.0, 0.0) + max(0.0 - float(phi.min()), 0.0)
    return _result("elliptic.maximum_principle", over, 1e-12)


def check_harmonic_convergence_order():
    spec = LakeSpec(domain=Annulus(0.25, 1.0), depth_law=PowerRadial(1.0))
    errs = []
    for n in (64, 128):
        g = polar_grid(n, 16, 0.25, 1.0)
        op = assemble(sample_depth(spec, g), g, BoundaryValues(0.0, 1.0))
        phi, _ = solve(op, tol=1e-12)
        exact = (g.cell_r - 1.0) / (0.25 - 1.0)
        errs.append(np.abs(phi - exact).max())
    order = np.log2(errs[0] / errs[1])
    return CheckResult("elliptic.convergence_order", order >= 1.9, float(order), ">= 1.9")


# -- hodge -------------------------------------------------------------------

def check_a_scal_identity():
    spec = LakeSpec(domain=Annulus(0.3, 1.0), depth_law=PowerRadial(1.0))
    g = polar_grid(64, 16, 0.3, 1.0)
    basis = harmonic_basis(spec, g)
    return _result("hodge.a_scal_energy_identity",
                   abs(basis.a_scal * basis.energy_phi + 1.0), 1e-10)


def check_circulation_roundtrip(flip_sign: float = 1.0):
    spec = LakeSpec(domain=Annulus(0.15, 1.0), depth_law=PowerRadial(1.0))
    g = polar_grid(96, 24, 0.15, 1.0)
    d = sample_depth(spec, g)
    basis = harmonic_basis(spec, g, d)
    omega = np.ones(g.n_cells)
    vel, _ = reconstruct_velocity(spec, g, basis, omega, 1.0, d)
    vel.psi_cells = flip_sign * vel.psi_cells
    vel.psi_island = flip_sign * vel.psi_island
    gam = generalized_circulation(vel, flip_sign * d.b_cell * omega,
                                  default_cutoff(g, 0.15), g)
    return _result("hodge.circulation_roundtrip", abs(gam - 1.0), 1e-6)


def check_probe_independence():
    spec = LakeSpec(domain=Annulus(0.1, 1.0), depth_law=PowerRadial(1.0))
    g = polar_grid(96, 24, 0.1, 1.0)
    d = sample_depth(spec, g)
    basis = harmonic_basis(spec, g, d)
    omega = 0.5 * np.ones(g.n_cells)
    vel, _ = reconstruct_velocity(spec, g, basis, omega, 1.0, d)
    bw = d.b_cell * omega
    delta = 0.2
    g1 = generalized_circulation(vel, bw, CutoffChi(delta), g)
    g2 = generalized_circulation(vel, bw, CutoffChi(1.5 * delta, 0.9), g)
    return _result("hodge.cutoff_independence", abs(g1 - g2), 1e-6)


def check_capacity_dichotomy():
    spec_p = LakeSpec(domain=Disk(1.0), depth_law=PowerRadial(1.0))
    radii = [0.25, 0.125, 0.0625]
    caps = [capacity(spec_p, r, n_r=192, n_theta=16) for r in radii]
    floor = capacity_floor(spec_p)
    mono = all(b < a for a, b in zip(caps, caps[1:]))
    above = all(c >= floor * (1 - 1e-9) for c in caps)
    spec_f = LakeSpec(domain=Disk(1.0), depth_law=Flat(1.0))
    caps_f = [capacity(spec_f, r, n_r=192, n_theta=16) for r in radii]
    to_zero = caps_f[-1] < 0.75 * caps_f[0]
    ok = mono and above and to_zero
    return CheckResult("hodge.capacity_dichotomy", ok, float(caps[-1] - floor),
                       ">= 0, decreasing; flat -> 0")


def check_energy_bound():
    spec = LakeSpec(domain=Disk(1.0), depth_law=PowerRadial(1.0))
    study = StudySpec(base=spec, mode="evanescent", eps_list=[0.2, 0.1, 0.05],
                      gamma=1.0, omega0=lambda x, y: np.ones_like(np.asarray(x)),
                      probes=(0.5,), n_r=96, n_theta=16)
    rep = run_study(study)
    ven = [r.velocity_energy for r in rep.rows]
    c0 = ven[0] / 2.0  # |gamma| + sup omega = 2
    worst = max(v / 2.0 for v in ven)
    return CheckResult("hodge.velocity_energy_bound", worst <= 1.2 * c0,
                       float(worst / c0), "<= 1.2 x coarsest")


# -- transport ----------------------------------------------------------------

def _radial_fixture(n=64):
    spec = LakeSpec(domain=Annulus(0.2, 1.0), depth_law=PowerRadial(1.0))
    g = polar_grid(n, 24, 0.2, 1.0)
    d = sample_depth(spec, g)
    basis = harmonic_basis(spec, g, d)
    om0 = np.exp(-((g.cell_r - 0.55) / 0.12) ** 2)
    return spec, g, d, basis, om0


def check_transport_conservation(cfl: float = 0.45):
    spec, g, d, basis, om0 = _radial_fixture()
    st0 = initial_state(spec, g, d, basis, om0, 1.0)
    snaps = evolve(st0, 0.1, spec, g, d, basis, 1.0,
                   TimeStepper(cfl=cfl), snapshot_every=10 ** 9)
    m0 = float(np.sum(d.b_cell * om0 * g.cell_area))
    mT = float(np.sum(d.b_cell * snaps[-1].omega * g.cell_area))
    return _result("transport.mass_conservation", abs(mT - m0) / abs(m0), 1e-12)


def check_transport_max_principle():
    spec, g, d, basis, om0 = _radial_fixture()
    om0 = om0 + 0.3 * np.cos(3 * np.arctan2(g.cell_y, g.cell_x))
    st0 = initial_state(spec, g, d, basis, om0, 1.0)
    snaps = evolve(st0, 0.1, spec, g, d, basis, 1.0, TimeStepper(),
                   snapshot_every=10 ** 9)
    om = snaps[-1].omega
    over = max(float(om.max() - om0.max()), float(om0.min() - om.min()), 0.0)
    return _result("transport.max_principle", over, 1e-12)


def check_circulation_in_time():
    spec, g, d, basis, om0 = _radial_fixture()
    st0 = initial_state(spec, g, d, basis, om0, 1.0)
    snaps = evolve(st0, 0.1, spec, g, d, basis, 1.0, TimeStepper(), snapshot_every=5)
    chi = default_cutoff(g, 0.2)
    gams = [flow_diagnostics(s, g, d, chi)["gamma"] for s in snaps]
    drift = max(abs(x - gams[0]) for x in gams)
    return _result("transport.circulation_in_time", drift, 1e-6)


def check_radial_steadiness():
    spec, g, d, basis, om0 = _radial_fixture()
    st0 = initial_state(spec, g, d, basis, om0, 1.0)
    snaps = evolve(st0, 0.2, spec, g, d, basis, 1.0, TimeStepper(), snapshot_every=10 ** 9)
    l1 = float(np.sum(np.abs(snaps[-1].omega - om0) * g.cell_area))
    return _result("transport.radial_steadiness", l1, 2e-2)


def check_cfl_guard(cfl: float = 2.0):
    spec, g, d, basis, om0 = _radial_fixture(n=32)
    st0 = initial_state(spec, g, d, basis, om0, 1.0)
    try:
        evolve(st0, 0.05, spec, g, d, basis, 1.0, TimeStepper(cfl=cfl),
               snapshot_every=10 ** 9)
    except LakeError as e:
        return CheckResult("transport.cfl_guard", True, cfl,
                           f"raised {type(e).__name__}")
    return CheckResult("transport.cfl_guard", False, cfl, "expected TimeStepTooLarge")


# -- limits --------------------------------------------------------------------

def check_small_evanescent_study():
    base = LakeSpec(domain=Disk(1.0), depth_law=PowerRadial(1.0))
    study = StudySpec(base=base, mode="evanescent", eps_list=[0.2, 0.1, 0.05],
                      gamma=1.0, omega0=None, probes=(0.5, 0.7), band=(0.25, 0.9),
                      n_r=128, n_theta=16)
    rep = run_study(study)
    ok = rep.passed and abs(rep.dirac_strength - 1.0) < 5e-2
    return CheckResult("limits.evanescent_study", ok, rep.dirac_strength,
                       "dirac ~ 1, checks pass")


def check_small_emergent_study():
    base = LakeSpec(domain=Disk(1.0), depth_law=PowerRadial(1.0))
    study = StudySpec(base=base, mode="emergent", eps_list=[0.2, 0.1, 0.05, 0.025],
                      omega0=lambda x, y: np.ones_like(np.asarray(x)),
                      probes=(0.5,), n_r=96, n_theta=16)
    rep = run_study(study)
    return CheckResult("limits.emergent_study", rep.passed,
                       float(abs(rep.dirac_strength)), "no vortex offset, checks pass")


ALL_CHECKS = [
    check_cell_areas,
    check_face_depth_between_cells,
    check_norm_homogeneity,
    check_island_nestedness,
    check_operator_symmetry,
    check_energy_identity,
    check_maximum_principle,
    check_harmonic_convergence_order,
    check_a_scal_identity,
    check_circulation_roundtrip,
    check_probe_independence,
    check_capacity_dichotomy,
    check_energy_bound,
    check_transport_conservation,
    check_transport_max_principle,
    check_circulation_in_time,
    check_radial_steadiness,
    check_cfl_guard,
    check_small_evanescent_study,
    check_small_emergent_study,
]


def run_suite(checks=None):
    """Run all checks, converting exceptions into failing rows."""
    results = []
    for fn in checks or ALL_CHECKS:
        try:
            results.append(fn())
        except LakeError as e:
            results.append(CheckResult(fn.__name__, False, float("nan"),
                                       f"raised {type(e).__name__}: {e}"))
    return results
