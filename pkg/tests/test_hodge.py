"""Harmonic basis, capacity, circulation functionals, velocity recovery."""

import numpy as np
import pytest

from lakelab import (Annulus, BadCutoff, CutoffChi, Disk, Flat, LakeSpec, NoIsland,
                     PowerRadial, capacity, capacity_floor, circle_circulation,
                     default_cutoff, enclosed_mass, generalized_circulation,
                     harmonic_basis, polar_grid, probe_circulation,
                     reconstruct_velocity, sample_depth, velocity_from_stream)


def make_lake(alpha, r_in, n_r=192, n_theta=32):
    law = Flat(1.0) if alpha == 0 else PowerRadial(alpha)
    spec = LakeSpec(domain=Annulus(r_in, 1.0), depth_law=law)
    g = polar_grid(n_r, n_theta, r_in, 1.0)
    d = sample_depth(spec, g)
    return spec, g, d


def H_field(grid):
    r2 = grid.cell_x ** 2 + grid.cell_y ** 2
    return np.stack([-grid.cell_y, grid.cell_x], axis=1) / (2 * np.pi * r2[:, None])


# -- harmonic basis ---------------------------------------------------------------

def test_basis_energy_power_law():
    spec, g, d = make_lake(1.0, 0.5)
    basis = harmonic_basis(spec, g, d)
    assert basis.energy_phi == pytest.approx(4 * np.pi, rel=1e-4)
    assert basis.a_scal == pytest.approx(-1 / (4 * np.pi), rel=1e-4)
    assert basis.a_scal * basis.energy_phi == pytest.approx(-1.0, abs=1e-10)


def test_basis_energy_flat():
    spec, g, d = make_lake(0, 0.5)
    basis = harmonic_basis(spec, g, d)
    assert basis.energy_phi == pytest.approx(2 * np.pi / np.log(2), rel=1e-4)
    exact = np.log(g.cell_r) / np.log(0.5)
    assert np.abs(basis.phi1 - exact).max() < 1e-4


def test_basis_on_one_ring_annulus():
    spec, g, d = make_lake(1.0, 0.5, n_r=1, n_theta=8)
    basis = harmonic_basis(spec, g, d)
    assert np.isfinite(basis.energy_phi) and basis.energy_phi > 0
    # brute-force two-transmissibility oracle for the single unknown ring
    isl = g.face_tag == 2
    out = g.face_tag == 1
    T_in = float((g.face_len[isl] / (d.b_face[isl] * g.face_dist[isl])).sum())
    T_out = float((g.face_len[out] / (d.b_face[out] * g.face_dist[out])).sum())
    phi = T_in / (T_in + T_out)
    energy = T_in * (1 - phi) ** 2 + T_out * phi ** 2
    assert basis.phi1[0] == pytest.approx(phi, rel=1e-12)
    assert basis.energy_phi == pytest.approx(energy, rel=1e-10)
    # in the right ballpark of the closed form at this resolution
    assert basis.energy_phi == pytest.approx(4 * np.pi, rel=0.3)


def test_no_island_raises():
    spec = LakeSpec(domain=Disk(1.0), depth_law=Flat(1.0))
    g = polar_grid(16, 8, 0.0, 1.0)
    with pytest.raises(NoIsland):
        harmonic_basis(spec, g)


# -- capacity ----------------------------------------------------------------------

def test_capacity_power_law_examples():
    spec = LakeSpec(domain=Disk(1.0), depth_law=PowerRadial(1.0))
    assert capacity(spec, 0.5, n_r=256, n_theta=16) == pytest.approx(4 * np.pi, rel=1e-3)


def test_capacity_monotone_toward_floor():
    spec = LakeSpec(domain=Disk(1.0), depth_law=PowerRadial(1.0))
    caps = [capacity(spec, r, n_r=192, n_theta=16) for r in (0.5, 0.25, 0.125)]
    floor = capacity_floor(spec)
    assert floor == pytest.approx(2 * np.pi, rel=1e-10)
    assert all(b < a for a, b in zip(caps, caps[1:]))
    assert all(c > floor for c in caps)


def test_capacity_flat_vanishes():
    spec = LakeSpec(domain=Disk(1.0), depth_law=Flat(1.0))
    caps = [capacity(spec, r, n_r=192, n_theta=16) for r in (0.5, 0.25, 0.125)]
    expected = [2 * np.pi / np.log(1 / r) for r in (0.5, 0.25, 0.125)]
    np.testing.assert_allclose(caps, expected, rtol=1e-3)
    assert capacity_floor(spec) == 0.0


# -- circulation -------------------------------------------------------------------

def test_circulation_of_point_vortex_field():
    spec, g, d = make_lake(1.0, 0.25)
    gam = generalized_circulation(H_field(g), None, CutoffChi(0.3), g)
    assert gam == pytest.approx(1.0, abs=1e-5)


def test_circulation_of_zero_field():
    spec, g, d = make_lake(1.0, 0.25)
    assert generalized_circulation(np.zeros((g.n_cells, 2)), None,
                                   CutoffChi(0.3), g) == 0.0


def test_circulation_dirichlet_part_vanishes_on_disk():
    spec = LakeSpec(domain=Disk(1.0), depth_law=Flat(1.0))
    g = polar_grid(96, 24, 0.0, 1.0)
    d = sample_depth(spec, g)
    om = np.exp(-((g.cell_x - 0.3) ** 2 + g.cell_y ** 2) / 0.02)
    vel, _ = reconstruct_velocity(spec, g, None, om, 0.0, d)
    gam = generalized_circulation(vel, d.b_cell * om, CutoffChi(0.25), g)
    assert abs(gam) < 1e-6
    # independent midpoint line-integral oracle: circulation on a probe circle
    # minus the enclosed curl also vanishes
    rho = 0.8
    line = circle_circulation(vel, g, rho)
    assert abs(line - enclosed_mass(d.b_cell * om, g, rho)) < 1e-3


def test_cutoff_independence():
    spec, g, d = make_lake(1.0, 0.1, n_r=256)
    basis = harmonic_basis(spec, g, d)
    om = 0.7 * np.ones(g.n_cells)
    vel, _ = reconstruct_velocity(spec, g, basis, om, 1.3, d)
    bw = d.b_cell * om
    g1 = generalized_circulation(vel, bw, CutoffChi(0.2), g)
    g2 = generalized_circulation(vel, bw, CutoffChi(0.3, 0.9), g)
    assert g1 == pytest.approx(1.3, abs=1e-6)
    assert abs(g1 - g2) < 1e-6


def test_cutoff_leaving_domain_rejected():
    spec, g, d = make_lake(1.0, 0.25)
    vel = H_field(g)
    with pytest.raises(BadCutoff):
        generalized_circulation(vel, None, CutoffChi(0.1), g)  # dips into island
    with pytest.raises(BadCutoff):
        generalized_circulation(vel, None, CutoffChi(0.6), g)  # exits the shore


# -- velocity reconstruction --------------------------------------------------------

def test_reconstruct_pure_circulation_matches_point_vortex():
    spec, g, d = make_lake(1.0, 0.25, n_r=256, n_theta=64)
    basis = harmonic_basis(spec, g, d)
    vel, _ = reconstruct_velocity(spec, g, basis, None, 1.0, d)
    H = H_field(g)
    # the island-adjacent ring carries the largest reconstruction smearing
    assert np.abs(vel.v - H).max() <= 5e-3 * np.abs(H).max()
    k = np.argmin(np.abs(g.cell_r - 0.5))
    # cell-average direction smearing is ~cos(pi/n_theta), a 0.1% effect here
    assert np.hypot(*vel.v[k]) == pytest.approx(1 / (2 * np.pi * g.cell_r[k]), rel=3e-3)
    assert vel.div_residual(g) < 1e-12
    assert np.abs(vel.flux[~g.interior_faces]).max() == 0.0


def test_reconstruct_zero_data_gives_zero_velocity():
    spec, g, d = make_lake(1.0, 0.25)
    basis = harmonic_basis(spec, g, d)
    vel, _ = reconstruct_velocity(spec, g, basis, None, 0.0, d)
    assert np.abs(vel.v).max() < 1e-12


def test_reconstruct_solid_rotation_flat_disk():
    spec = LakeSpec(domain=Disk(1.0), depth_law=Flat(1.0))
    g = polar_grid(128, 32, 0.0, 1.0)
    d = sample_depth(spec, g)
    vel, _ = reconstruct_velocity(spec, g, None, np.ones(g.n_cells), 0.0, d)
    speed = np.hypot(vel.v[:, 0], vel.v[:, 1])
    for rho in (0.5, 0.25):
        k = np.argmin(np.abs(g.cell_r - rho))
        assert speed[k] == pytest.approx(g.cell_r[k] / 2, rel=5e-3)
    assert vel.div_residual(g) < 1e-12


def test_roundtrip_circulation_for_many_pairs():
    spec, g, d = make_lake(1.0, 0.15, n_r=160)
    basis = harmonic_basis(spec, g, d)
    chi = default_cutoff(g, 0.15)
    for gamma, amp in ((1.0, 0.0), (0.0, 1.0), (-2.0, 0.5), (0.7, -1.0)):
        om = amp * (1.0 + 0.2 * np.sin(3 * np.arctan2(g.cell_y, g.cell_x)))
        vel, _ = reconstruct_velocity(spec, g, basis, om, gamma, d)
        gam = generalized_circulation(vel, d.b_cell * om, chi, g)
        assert gam == pytest.approx(gamma, abs=1e-6)


def test_probe_matches_circle_integral():
    spec, g, d = make_lake(1.0, 0.2, n_r=256, n_theta=64)
    basis = harmonic_basis(spec, g, d)
    om = np.ones(g.n_cells)
    vel, _ = reconstruct_velocity(spec, g, basis, om, 1.0, d)
    for rho in (0.5, 0.75):
        pc = probe_circulation(vel, g, rho)
        cc = circle_circulation(vel, g, rho)
        assert pc == pytest.approx(cc, abs=2e-3)


def test_mixed_probe_value():
    # gamma + enclosed mass: 1 + 2 pi rho^3 / 3 at rho = 0.5 (alpha = 1)
    spec, g, d = make_lake(1.0, 0.05, n_r=384, n_theta=32)
    basis = harmonic_basis(spec, g, d)
    vel, _ = reconstruct_velocity(spec, g, basis, np.ones(g.n_cells), 1.0, d)
    expected = 1.0 + 2 * np.pi * 0.5 ** 3 / 3
    assert probe_circulation(vel, g, 0.5) == pytest.approx(expected, rel=2e-3)


def test_velocity_from_stream_respects_island_value():
    spec, g, d = make_lake(1.0, 0.3)
    psi = np.zeros(g.n_cells)
    vel = velocity_from_stream(g, d, psi, psi_outer=0.0, psi_island=1.0)
    # constant island stream with zero cells: flux concentrated at the rim,
    # still exactly divergence-free
    assert vel.div_residual(g) < 1e-12
