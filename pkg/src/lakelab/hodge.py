"""Harmonic stream basis, weighted capacity, circulation and velocity recovery.

On an annular lake the velocity splits into a vorticity-driven part and a
circulation part: v = (1/b) grad_perp(psi0) + alpha (1/b) grad_perp(psi1),
where psi0 solves the Dirichlet problem with source b*omega and psi1 is the
depth-harmonic stream function normalized to unit island circulation. The
normalization constant is forced by the weighted Dirichlet energy of the
island profile phi1 (boundary values 1 island / 0 outer):

    a = -1 / int (1/b) |grad phi1|^2,   psi1 = a * phi1,

and that energy is also the discrete capacity of the island with weight 1/b.

Circulation is measured with a radial plateau cutoff chi (1 around the
island, 0 near the outer shore):

    gamma(v) = -int chi curl(v) - int grad_perp(chi) . v.

For stream-generated velocity fields the second integral is evaluated
through the face transmissibilities, which makes gamma independent of the
cutoff and equal to the prescribed circulation up to the solver tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
import scipy.integrate

from .elliptic import BoundaryValues, SolveReport, assemble, solve
from .errors import BadCutoff, NoIsland
from .fields import DepthSamples, sample_depth
from .geometry import Annulus, CutoffChi, LakeSpec, PowerRadial, probe_cutoff
from .grid import Grid, ISLAND, OUTER, POLE, polar_grid

__all__ = ["HodgeBasis", "VelocityField", "harmonic_basis", "capacity",
           "capacity_floor", "velocity_from_stream", "reconstruct_velocity",
           "generalized_circulation", "probe_circulation", "circle_circulation",
           "enclosed_mass", "dirac_diagnostic_row", "default_cutoff"]


# ---------------------------------------------------------------------------
# Harmonic basis and capacity
# ---------------------------------------------------------------------------

@dataclass
class HodgeBasis:
    phi1: np.ndarray
    energy_phi: float
    a_scal: float
    psi1: np.ndarray
    capacity: float
    report: SolveReport


def harmonic_basis(spec: LakeSpec, grid: Grid, depth: Optional[DepthSamples] = None,
                   tol: float = 1e-10) -> HodgeBasis:
    """Depth-harmonic island profile phi1, its energy and the circulation-
    normalized psi1 = a * phi1."""
    if not grid.has_island():
        raise NoIsland("simply connected lake has no harmonic basis")
    if depth is None:
        depth = sample_depth(spec, grid)
    op = assemble(depth, grid, BoundaryValues(outer=0.0, island=1.0))
    phi1, report = solve(op, tol=tol)
    energy = report.energy
    a = -1.0 / energy
    return HodgeBasis(phi1=phi1, energy_phi=energy, a_scal=a, psi1=a * phi1,
                      capacity=energy, report=report)


def capacity(spec: LakeSpec, island_radius: float, n_r: int = 512, n_theta: int = 64,
             grading: str = "geometric", tol: float = 1e-10) -> float:
    """Weighted capacity of the disk of given radius: the Dirichlet energy of
    the discrete minimizer among stream functions equal to 1 on the disk."""
    r_out = spec.outer_radius
    if not 0.0 < island_radius < r_out:
        raise NoIsland(f"island radius {island_radius} not strictly inside the lake")
    sub = LakeSpec(domain=Annulus(island_radius, r_out), depth_law=spec.depth_law,
                   a0=spec.a0, a1=spec.a1, c_floor=spec.c_floor)
    grid = polar_grid(n_r, n_theta, island_radius, r_out, grading=grading)
    basis = harmonic_basis(sub, grid, tol=tol)
    return basis.capacity


def capacity_floor(spec: LakeSpec) -> float:
    """Analytic lower bound 4 pi^2 / int_Omega b/|x|^2 for the capacity of
    the degenerate center. Zero when the depth does not vanish there (the
    bound degenerates with the divergent integral)."""
    if not spec.is_punctured:
        return 0.0
    R = spec.outer_radius
    law = spec.depth_law
    if isinstance(law, PowerRadial):
        integral = 2.0 * np.pi * R ** law.alpha / law.alpha
    else:
        val, _ = scipy.integrate.quad(lambda r: 2.0 * np.pi * law(r, 0.0) / r, 0.0, R,
                                      limit=200)
        integral = val
    return 4.0 * np.pi ** 2 / integral


# ---------------------------------------------------------------------------
# Velocity fields from stream functions
# ---------------------------------------------------------------------------

@dataclass
class VelocityField:
    """Cell velocities plus the staggered data they derive from.

    ``flux`` holds the integrated volume flux of b*v through each face along
    the stored normal; it is exactly divergence-free by construction and
    vanishes on every boundary face.
    """

    v: np.ndarray
    flux: np.ndarray
    u_normal: np.ndarray
    psi_cells: np.ndarray
    psi_vertex: np.ndarray
    psi_outer: float
    psi_island: float
    face_T: np.ndarray
    alpha: float = 0.0
    psi0: Optional[np.ndarray] = None

    def div_residual(self, grid: Grid) -> float:
        scale = float(np.abs(self.flux).max()) or 1.0
        return float(np.abs(grid.cell_divergence(self.flux)).max()) / scale


def _face_T(grid: Grid, depth: DepthSamples) -> np.ndarray:
    T = np.zeros(grid.n_faces)
    live = grid.face_tag != POLE
    T[live] = grid.face_len[live] / (depth.b_face[live] * grid.face_dist[live])
    return T


def velocity_from_stream(grid: Grid, depth: DepthSamples, psi_cells,
                         psi_outer: float = 0.0, psi_island: float = 0.0,
                         alpha: float = 0.0, psi0=None) -> VelocityField:
    psi_v = grid.vertex_stream(psi_cells, outer_value=psi_outer, island_value=psi_island)
    flux = grid.flux_from_vertex_stream(psi_v)
    live = grid.face_len > 0.0
    u = np.zeros(grid.n_faces)
    u[live] = flux[live] / (grid.face_len[live] * depth.b_face[live])
    v = grid.cells_from_face_normals(u)
    return VelocityField(v=v, flux=flux, u_normal=u, psi_cells=np.asarray(psi_cells, float),
                         psi_vertex=psi_v, psi_outer=psi_outer, psi_island=psi_island,
                         face_T=_face_T(grid, depth), alpha=alpha, psi0=psi0)


def reconstruct_velocity(spec: LakeSpec, grid: Grid, basis: Optional[HodgeBasis],
                         omega, gamma: float, depth: Optional[DepthSamples] = None,
                         tol: float = 1e-10, x0=None, op=None):
    """Velocity with curl = b*omega and prescribed island circulation.

    Simply connected lakes take ``basis=None`` and ignore ``gamma``; with an
    island present, alpha = gamma + int b omega phi1 weights the circulation
    part of the stream function. A pre-assembled homogeneous-Dirichlet
    operator can be passed as ``op`` (time steppers reuse it).
    """
    if depth is None:
        depth = sample_depth(spec, grid)
    has_island = grid.has_island()
    if has_island and basis is None:
        raise NoIsland("island lake needs a harmonic basis for reconstruction")
    omega = np.zeros(grid.n_cells) if omega is None else np.asarray(omega, dtype=float)
    f = depth.b_cell * omega
    island_bc = 0.0 if has_island else None
    if op is None:
        op = assemble(depth, grid, BoundaryValues(outer=0.0, island=island_bc))
    psi0, report = solve(op, f=f, tol=tol, x0=x0)
    if has_island:
        alpha = gamma + float(np.sum(f * basis.phi1 * grid.cell_area))
        psi = psi0 + alpha * basis.psi1
        psi_island = alpha * basis.a_scal
    else:
        alpha = 0.0
        psi = psi0
        psi_island = 0.0
    vel = velocity_from_stream(grid, depth, psi, psi_outer=0.0, psi_island=psi_island,
                               alpha=alpha, psi0=psi0)
    return vel, report


# ---------------------------------------------------------------------------
# Circulation functionals
# ---------------------------------------------------------------------------

def default_cutoff(grid: Grid, island_radius: Optional[float] = None) -> CutoffChi:
    """Plateau cutoff sized for a lake: 3x the island radius when that fits,
    capped to keep the transition inside the wet region."""
    r_out = float(np.max(np.hypot(grid.vert_x, grid.vert_y)))
    r_in = island_radius
    if r_in is None:
        r_in = float(grid.r_faces[0]) if grid.kind == "polar" else 0.0
    if r_in == 0.0:
        delta = r_out / 3.0
        return CutoffChi(delta=delta)
    delta = min(3.0 * r_in, r_out / 3.0)
    if delta <= r_in:
        delta = r_in * 1.02
    outer = min(2.0 * delta, 0.5 * (delta + 0.98 * r_out))
    if outer <= delta:
        raise BadCutoff("island leaves no room for a circulation cutoff")
    return CutoffChi(delta=delta, outer=outer)


def _check_cutoff(chi: CutoffChi, grid: Grid):
    r = grid.cell_r
    if grid.kind == "polar":
        r_in, r_out = grid.r_faces[0], grid.r_faces[-1]
        if chi.delta < r_in or chi.outer > r_out:
            raise BadCutoff(
                f"cutoff band [{chi.delta:.3f}, {chi.outer:.3f}] leaves the wet annulus"
                f" [{r_in:.3f}, {r_out:.3f}]")
        return
    # staircase check: the transition band must be covered by wet cells
    band = (r > chi.delta - 2 * np.sqrt(grid.cell_area.max())) & (r < chi.outer)
    if not band.any():
        raise BadCutoff("cutoff transition band contains no wet cells")
    if chi.outer > np.max(r) + np.sqrt(grid.cell_area.max()):
        raise BadCutoff("cutoff support exits the wet region")


def _ring_weighted_sum(grid: Grid, cell_vals, radial_integral):
    """sum over cells of cell_vals * dtheta * I(ring), with I the exact
    radial integral over the cell's ring; used for radial cutoffs on polar
    grids where it removes the midpoint quadrature error in r."""
    n_r, n_th = grid.n_r, grid.n_theta
    rf = grid.r_faces
    ring_I = np.array([radial_integral(rf[i], rf[i + 1]) for i in range(n_r)])
    dth = 2.0 * np.pi / n_th
    vals = np.asarray(cell_vals).reshape(n_r, n_th)
    return float(np.sum(vals * ring_I[:, None]) * dth)


def _chi_integral(chi: CutoffChi, a: float, b: float) -> float:
    """Exact int_a^b chi(r) dr for the quintic plateau profile."""
    d, o = chi.delta, chi.outer
    W = o - d

    def piece(lo, hi):
        # on the ramp chi = 1 - s(t), t=(r-d)/W ; int (1-s) dt has antiderivative
        # t - (t^6 - 3 t^5 + 2.5 t^4)
        t0, t1 = (lo - d) / W, (hi - d) / W

        def F(t):
            return t - (t ** 6 - 3.0 * t ** 5 + 2.5 * t ** 4)

        return W * (F(t1) - F(t0))

    total = 0.0
    lo1, hi1 = max(a, 0.0), min(b, d)
    if hi1 > lo1:
        total += hi1 - lo1
    lo2, hi2 = max(a, d), min(b, o)
    if hi2 > lo2:
        total += piece(lo2, hi2)
    return total


def _chi_integral_r(chi: CutoffChi, a: float, b: float) -> float:
    """Exact int_a^b chi(r) r dr."""
    d, o = chi.delta, chi.outer
    W = o - d

    def piece(lo, hi):
        t0, t1 = (lo - d) / W, (hi - d) / W

        def F(t):
            # int (1 - s(t)) (d + W t) dt
            S = t ** 6 - 3.0 * t ** 5 + 2.5 * t ** 4
            Ts = (6.0 / 7.0) * t ** 7 - 2.5 * t ** 6 + 2.0 * t ** 5
            return d * (t - S) + W * (0.5 * t * t - Ts)

        return W * (F(t1) - F(t0))

    total = 0.0
    lo1, hi1 = max(a, 0.0), min(b, d)
    if hi1 > lo1:
        total += 0.5 * (hi1 ** 2 - lo1 ** 2)
    lo2, hi2 = max(a, d), min(b, o)
    if hi2 > lo2:
        total += piece(lo2, hi2)
    return total


def _chi_grad_integral_r(chi: CutoffChi, a: float, b: float) -> float:
    """Exact int_a^b chi'(r) r dr = [chi r] - int chi."""
    cb = float(chi.value(b, 0.0))
    ca = float(chi.value(a, 0.0))
    return cb * b - ca * a - _chi_integral(chi, a, b)


def _vtheta_cells(grid: Grid, v):
    r = grid.cell_r
    safe = np.where(r > 0, r, 1.0)
    return (-grid.cell_y * v[:, 0] + grid.cell_x * v[:, 1]) / safe


def generalized_circulation(v: Union[VelocityField, np.ndarray], curl_cells,
                            chi: CutoffChi, grid: Grid) -> float:
    """Cutoff surrogate of the line integral of v around the island:
    gamma = -int chi curl(v) - int grad_perp(chi) . v.

    ``curl_cells`` is the cell curl of v (b*omega for lake flows); pass None
    for curl-free fields. Stream-generated fields use the exact face form of
    the gradient term, plain (n, 2) cell fields are integrated by quadrature
    (exact ring integrals in r on polar grids).
    """
    _check_cutoff(chi, grid)
    stream_path = isinstance(v, VelocityField)
    term1 = 0.0
    if curl_cells is not None:
        curl_cells = np.asarray(curl_cells, dtype=float)
        if grid.kind == "polar" and not stream_path:
            term1 = _ring_weighted_sum(grid, curl_cells,
                                       lambda a, b: _chi_integral_r(chi, a, b))
        else:
            # plain cell sum: pairs exactly with the face form of the
            # gradient term below, so the two contributions cancel to the
            # boundary flux for stream-generated fields
            term1 = float(np.sum(chi.value(grid.cell_x, grid.cell_y)
                                 * curl_cells * grid.cell_area))

    if stream_path:
        # -int grad(chi).(1/b) grad(psi) via face transmissibilities: exact
        # summation by parts against the discrete operator
        chi_a = chi.value(grid.cell_x[grid.face_cell_a], grid.cell_y[grid.face_cell_a])
        interior = grid.interior_faces
        chi_b = np.where(interior,
                         chi.value(grid.cell_x[grid.face_cell_b],
                                   grid.cell_y[grid.face_cell_b]),
                         chi.value(grid.face_x, grid.face_y))
        psi_a = v.psi_cells[grid.face_cell_a]
        psi_b = np.where(interior, v.psi_cells[np.maximum(grid.face_cell_b, 0)], 0.0)
        psi_b = np.where(grid.face_tag == OUTER, v.psi_outer, psi_b)
        psi_b = np.where(grid.face_tag == ISLAND, v.psi_island, psi_b)
        psi_b = np.where(grid.face_tag == POLE, psi_a, psi_b)
        term2 = float(np.sum(v.face_T * (chi_b - chi_a) * (psi_b - psi_a)))
        return -term1 - term2

    v = np.asarray(v, dtype=float)
    if grid.kind == "polar":
        vtheta = _vtheta_cells(grid, v)
        term2 = _ring_weighted_sum(grid, vtheta,
                                   lambda a, b: _chi_grad_integral_r(chi, a, b))
    else:
        gperp = chi.grad_perp(grid.cell_x, grid.cell_y)
        term2 = float(np.sum(np.sum(gperp * v, axis=1) * grid.cell_area))
    return -term1 - term2


def probe_width(grid: Grid, rho: float) -> float:
    """Default half-width of the symmetric probe band at radius rho."""
    if grid.kind == "polar":
        dr = float(np.max(np.diff(grid.r_faces)))
        return max(4.0 * dr, 0.02 * rho)
    return max(3.0 * np.sqrt(float(grid.cell_area.max())), 0.05 * rho)


def probe_circulation(v: Union[VelocityField, np.ndarray], grid: Grid, rho: float,
                      width: Optional[float] = None) -> float:
    """Total circulation of v on the circle of radius rho, measured with a
    narrow symmetric cutoff band: -int grad_perp(chi_rho) . v. For lake flows
    this approaches gamma + int_{B_rho} b omega."""
    if width is None:
        width = probe_width(grid, rho)
    chi = probe_cutoff(rho, width)
    return generalized_circulation(v, None, chi, grid)


def circle_circulation(v: Union[VelocityField, np.ndarray], grid: Grid,
                       rho: float) -> float:
    """Midpoint line integral of v . tau on the circle of radius rho
    (counterclockwise), interpolating the azimuthal velocity between the two
    nearest cell rings. Polar grids only; used as an independent check of the
    cutoff-based circulation."""
    if grid.kind != "polar":
        raise BadCutoff("circle circulation probe needs a polar grid")
    if isinstance(v, VelocityField):
        # azimuthal faces carry the normal velocity v.theta directly; they
        # are the last n_r * n_theta faces of a polar grid
        n_az = grid.n_r * grid.n_theta
        vtheta = v.u_normal[-n_az:].reshape(grid.n_r, grid.n_theta)
    else:
        vtheta = _vtheta_cells(grid, np.asarray(v, dtype=float)).reshape(
            grid.n_r, grid.n_theta)
    rc = 0.5 * (grid.r_faces[:-1] + grid.r_faces[1:])
    if not rc[0] <= rho <= rc[-1]:
        raise BadCutoff(f"probe radius {rho} outside the cell-center range")
    i = int(np.searchsorted(rc, rho))
    if i == 0:
        ring = vtheta[0]
    else:
        w = (rho - rc[i - 1]) / (rc[i] - rc[i - 1])
        ring = (1.0 - w) * vtheta[i - 1] + w * vtheta[i]
    return float(np.mean(ring) * 2.0 * np.pi * rho)


def enclosed_mass(cell_vals, grid: Grid, rho: float) -> float:
    """Integral of a cell field over the disk of radius rho; polar grids
    weight the cut ring by its exact area fraction."""
    vals = np.asarray(cell_vals, dtype=float)
    if grid.kind == "polar":
        rf = grid.r_faces
        frac = np.clip((rho ** 2 - rf[:-1] ** 2) / (rf[1:] ** 2 - rf[:-1] ** 2), 0.0, 1.0)
        w = np.repeat(frac, grid.n_theta)
        return float(np.sum(vals * grid.cell_area * w))
    inside = grid.cell_r <= rho
    return float(np.sum(vals[inside] * grid.cell_area[inside]))


def dirac_diagnostic_row(v, b_omega, grid: Grid, rho: float,
                         gamma: Optional[float] = None):
    """One probe: (rho, measured circulation, gamma + int_{B_rho} b omega)."""
    circ = probe_circulation(v, grid, rho)
    if gamma is None:
        chi = default_cutoff(grid)
        gamma = generalized_circulation(v, b_omega, chi, grid)
    expected = gamma + (0.0 if b_omega is None else enclosed_mass(b_omega, grid, rho))
    return rho, circ, expected
