"""Conservative vorticity transport and weak-form residuals."""

import numpy as np
import pytest

from lakelab import (Annulus, BadTestFunction, Disk, Flat, LakeSpec, PowerRadial,
                     TimeStepper, TimeStepTooLarge, bump_scalar_test,
                     divfree_bump_test, evolve, flow_diagnostics, harmonic_basis,
                     initial_state, polar_grid, sample_depth, stable_dt, step,
                     weak_velocity_residual, weak_vorticity_residual)


def radial_lake(n_r=96, n_theta=32, r_in=0.2):
    spec = LakeSpec(domain=Annulus(r_in, 1.0), depth_law=PowerRadial(1.0))
    g = polar_grid(n_r, n_theta, r_in, 1.0)
    d = sample_depth(spec, g)
    basis = harmonic_basis(spec, g, d)
    return spec, g, d, basis


def blob_lake(n_r, n_theta):
    spec, g, d, basis = radial_lake(n_r, n_theta)
    om = np.exp(-(((g.cell_x - 0.55) ** 2 + g.cell_y ** 2)) / (2 * 0.12 ** 2))
    return spec, g, d, basis, om


# -- single steps -------------------------------------------------------------------

def test_constant_vorticity_is_steady():
    spec, g, d, basis = radial_lake()
    om0 = 0.8 * np.ones(g.n_cells)
    st = initial_state(spec, g, d, basis, om0, 1.0)
    st1 = step(st, spec, g, d, basis, 1.0, TimeStepper())
    np.testing.assert_allclose(st1.omega, om0, atol=1e-13)


def test_radial_state_is_steady():
    spec, g, d, basis = radial_lake()
    om0 = np.exp(-((g.cell_r - 0.55) / 0.1) ** 2)
    st = initial_state(spec, g, d, basis, om0, 1.0)
    snaps = evolve(st, 0.3, spec, g, d, basis, 1.0, TimeStepper(), snapshot_every=10 ** 9)
    l1 = float(np.sum(np.abs(snaps[-1].omega - om0) * g.cell_area))
    assert l1 < 1e-12


def test_blob_step_conserves_mass_and_bounds():
    spec, g, d, basis, om0 = blob_lake(64, 32)
    st = initial_state(spec, g, d, basis, om0, 1.0)
    st1 = step(st, spec, g, d, basis, 1.0, TimeStepper())
    q0 = d.b_cell * om0 * g.cell_area
    q1 = d.b_cell * st1.omega * g.cell_area
    assert abs(q1.sum() - q0.sum()) <= 1e-14 * abs(q0.sum()) + 1e-16
    assert st1.omega.max() <= om0.max() + 1e-12
    assert st1.omega.min() >= om0.min() - 1e-12


def test_brute_force_flux_telescoping():
    # hand-built upwind update: per-face loop accumulating both cells; the
    # global q-change must cancel face by face since boundary fluxes vanish
    spec, g, d, basis, om0 = blob_lake(24, 16)
    st = initial_state(spec, g, d, basis, om0, 1.0)
    F = st.velocity.flux
    up = np.where(F >= 0, om0[g.face_cell_a], om0[np.maximum(g.face_cell_b, 0)])
    change = {}
    for f in range(g.n_faces):
        qf = F[f] * up[f]
        a, b = g.face_cell_a[f], g.face_cell_b[f]
        change[a] = change.get(a, 0.0) - qf
        if b >= 0:
            change[b] = change.get(b, 0.0) + qf
    total = sum(change.values())
    assert abs(total) <= 1e-13 * np.abs(F).sum()
    assert np.abs(F[~g.interior_faces]).max() == 0.0


def test_cfl_guard():
    spec, g, d, basis = radial_lake(48, 16)
    om0 = np.exp(-((g.cell_r - 0.55) / 0.1) ** 2)
    st = initial_state(spec, g, d, basis, om0, 1.0)
    with pytest.raises(TimeStepTooLarge):
        step(st, spec, g, d, basis, 1.0, TimeStepper(cfl=2.0))
    dt_max = stable_dt(st, g, d)
    with pytest.raises(TimeStepTooLarge):
        step(st, spec, g, d, basis, 1.0, TimeStepper(), dt=1.5 * dt_max)


# -- evolve --------------------------------------------------------------------------

def test_evolve_zero_time_returns_initial():
    spec, g, d, basis = radial_lake(32, 16)
    st = initial_state(spec, g, d, basis, np.ones(g.n_cells), 1.0)
    snaps = evolve(st, 0.0, spec, g, d, basis, 1.0, TimeStepper())
    assert snaps == [st]


def test_circulation_conserved_in_time():
    spec, g, d, basis = radial_lake(64, 24)
    om0 = np.exp(-((g.cell_r - 0.55) / 0.1) ** 2)
    st = initial_state(spec, g, d, basis, om0, 1.0)
    snaps = evolve(st, 0.3, spec, g, d, basis, 1.0, TimeStepper(), snapshot_every=3)
    gams = [flow_diagnostics(s, g, d)["gamma"] for s in snaps]
    assert max(abs(x - gams[0]) for x in gams) < 1e-6


def test_blob_mass_conservation_over_run():
    spec, g, d, basis, om0 = blob_lake(48, 32)
    st = initial_state(spec, g, d, basis, om0, 1.0)
    snaps = evolve(st, 0.2, spec, g, d, basis, 1.0, TimeStepper(), snapshot_every=10 ** 9)
    m0 = float(np.sum(d.b_cell * om0 * g.cell_area))
    mT = float(np.sum(d.b_cell * snaps[-1].omega * g.cell_area))
    assert abs(mT - m0) <= 1e-12 * abs(m0)
    assert snaps[-1].omega.max() <= om0.max() + 1e-12
    assert snaps[-1].omega.min() >= om0.min() - 1e-12


def test_blob_l1_self_convergence():
    # restrict each run to the coarse mesh by conservative 2x2 averaging
    def run(n_r, n_theta, T=0.08):
        spec, g, d, basis, om0 = blob_lake(n_r, n_theta)
        st = initial_state(spec, g, d, basis, om0, 1.0)
        snaps = evolve(st, T, spec, g, d, basis, 1.0, TimeStepper(),
                       snapshot_every=10 ** 9)
        return g, d, snaps[-1].omega

    def restrict(om, g_f, d_f, g_c):
        q = (d_f.b_cell * om * g_f.cell_area).reshape(g_f.n_r, g_f.n_theta)
        q_c = (q[0::2, 0::2] + q[0::2, 1::2] + q[1::2, 0::2] + q[1::2, 1::2])
        spec_c = LakeSpec(domain=Annulus(0.2, 1.0), depth_law=PowerRadial(1.0))
        d_c = sample_depth(spec_c, g_c)
        return q_c.ravel() / (d_c.b_cell * g_c.cell_area)

    g32, d32, om32 = run(32, 16)
    g64, d64, om64 = run(64, 32)
    g128, d128, om128 = run(128, 64)
    e32 = np.sum(np.abs(om32 - restrict(om64, g64, d64, g32)) * g32.cell_area)
    e64 = np.sum(np.abs(om64 - restrict(om128, g128, d128, g64)) * g64.cell_area)
    order = np.log2(e32 / e64)
    assert order >= 0.8


# -- weak-form residuals ---------------------------------------------------------------

def test_vorticity_residual_zero_run():
    spec, g, d, basis = radial_lake(48, 16)
    st = initial_state(spec, g, d, basis, np.zeros(g.n_cells), 0.0)
    snaps = evolve(st, 0.1, spec, g, d, basis, 0.0, TimeStepper(), snapshot_every=1)
    phi = bump_scalar_test((0.55, 0.0), 0.3, 0.08)
    assert weak_vorticity_residual(snaps, phi, g, d) == 0.0
    Phi = divfree_bump_test((0.55, 0.0), 0.25, 0.08)
    assert weak_velocity_residual(snaps, Phi, g, d) == 0.0


def test_steady_residuals_are_small():
    spec, g, d, basis = radial_lake(128, 32)
    st = initial_state(spec, g, d, basis, np.zeros(g.n_cells), 1.0)
    snaps = evolve(st, 0.3, spec, g, d, basis, 1.0, TimeStepper(), snapshot_every=10)
    phi = bump_scalar_test((0.55, 0.0), 0.3, 0.25)
    assert abs(weak_vorticity_residual(snaps, phi, g, d)) < 1e-10
    Phi = divfree_bump_test((0.55, 0.0), 0.3, 0.25)
    assert abs(weak_velocity_residual(snaps, Phi, g, d)) < 1e-4


def test_residuals_shrink_under_refinement():
    def residuals(n_r, n_theta):
        spec, g, d, basis, om0 = blob_lake(n_r, n_theta)
        st = initial_state(spec, g, d, basis, om0, 1.0)
        snaps = evolve(st, 0.12, spec, g, d, basis, 1.0, TimeStepper(),
                       snapshot_every=1)
        phi = bump_scalar_test((0.55, 0.0), 0.3, 0.1)
        Phi = divfree_bump_test((0.55, 0.0), 0.28, 0.1)
        return (abs(weak_vorticity_residual(snaps, phi, g, d)),
                abs(weak_velocity_residual(snaps, Phi, g, d)))

    c = residuals(48, 24)
    f = residuals(96, 48)
    assert c[0] / f[0] >= 1.5
    assert c[1] / f[1] >= 1.5


def test_bad_test_functions_rejected():
    spec, g, d, basis = radial_lake(48, 16)
    st = initial_state(spec, g, d, basis, np.zeros(g.n_cells), 0.0)
    snaps = evolve(st, 0.1, spec, g, d, basis, 0.0, TimeStepper(), snapshot_every=1)
    with pytest.raises(BadTestFunction):
        # support sticks out of the wet annulus
        weak_vorticity_residual(snaps, bump_scalar_test((0.9, 0.0), 0.3, 0.08), g, d)
    with pytest.raises(BadTestFunction):
        # still alive at the final snapshot time
        weak_vorticity_residual(snaps, bump_scalar_test((0.55, 0.0), 0.2, 5.0), g, d)

    from lakelab.transport import VectorTestFunction
    bad = divfree_bump_test((0.55, 0.0), 0.25, 0.08)
    not_divfree = VectorTestFunction(
        value=lambda x, y, t: bad.value(x, y, t) + np.stack(
            [np.asarray(x) * 0.01, np.zeros_like(np.asarray(y))], axis=-1),
        jacobian=lambda x, y, t: bad.jacobian(x, y, t) + np.broadcast_to(
            np.array([[0.01, 0.0], [0.0, 0.0]]), np.shape(np.asarray(x)) + (2, 2)),
        dt=bad.dt)
    with pytest.raises(BadTestFunction):
        weak_velocity_residual(snaps, not_divfree, g, d)


def test_center_of_vorticity_drift_against_finer_reference():
    # drift of the vorticity centroid, measured against a 4x finer run,
    # shrinks at (at least) first order between N and 2N
    def centroid_at_T(n_r, n_theta, T=0.08):
        spec, g, d, basis, om0 = blob_lake(n_r, n_theta)
        st = initial_state(spec, g, d, basis, om0, 1.0)
        snaps = evolve(st, T, spec, g, d, basis, 1.0, TimeStepper(),
                       snapshot_every=10 ** 9)
        q = d.b_cell * snaps[-1].omega * g.cell_area
        return np.array([np.sum(q * g.cell_x), np.sum(q * g.cell_y)]) / q.sum()

    ref = centroid_at_T(192, 96)
    e48 = np.linalg.norm(centroid_at_T(48, 24) - ref)
    e96 = np.linalg.norm(centroid_at_T(96, 48) - ref)
    assert e96 < e48
    assert e48 / e96 >= 1.5
