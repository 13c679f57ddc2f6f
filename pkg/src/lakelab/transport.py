"""Conservative transport of potential vorticity coupled to the stream solve.

The evolved quantity is q = b*omega with the flux form dq/dt + div(q v) = 0
under the anelastic constraint div(b v) = 0. First-order upwind fluxes built
from the exactly divergence-free face fluxes give telescoping conservation
of int b omega and a discrete maximum principle for omega under the CFL
bound; time stepping is forward Euler or SSP Runge-Kutta 2. After each
stage the Dirichlet stream function is re-solved (warm-started) and the
circulation coefficient alpha is refreshed from gamma + int b omega phi1.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .elliptic import BoundaryValues, assemble, gradient
from .errors import BadTestFunction, TimeStepTooLarge
from .fields import DepthSamples, weighted_norm
from .geometry import LakeSpec
from .grid import Grid, POLE
from .hodge import (HodgeBasis, VelocityField, default_cutoff,
                    generalized_circulation, reconstruct_velocity)

__all__ = ["TimeStepper", "FlowState", "initial_state", "stable_dt", "step",
           "evolve", "flow_diagnostics", "ScalarTestFunction",
           "VectorTestFunction", "bump_scalar_test", "divfree_bump_test",
           "weak_vorticity_residual", "weak_velocity_residual"]


@dataclass(frozen=True)
class TimeStepper:
    cfl: float = 0.45
    scheme: str = "ssprk2"  # "euler" | "ssprk2"

    def __post_init__(self):
        if self.scheme not in ("euler", "ssprk2"):
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.cfl <= 0:
            raise ValueError("cfl must be positive")


@dataclass
class FlowState:
    t: float
    omega: np.ndarray
    velocity: VelocityField
    alpha: float
    diagnostics: dict = field(default_factory=dict)


def initial_state(spec: LakeSpec, grid: Grid, depth: DepthSamples,
                  basis: Optional[HodgeBasis], omega0, gamma: float,
                  tol: float = 1e-10, op=None) -> FlowState:
    omega0 = np.asarray(omega0, dtype=float)
    vel, _ = reconstruct_velocity(spec, grid, basis, omega0, gamma, depth,
                                  tol=tol, op=op)
    return FlowState(t=0.0, omega=omega0.copy(), velocity=vel, alpha=vel.alpha)


def _upwind_rate(omega, flux, grid: Grid):
    """Cell rate of change of q = b*omega from upwind face fluxes."""
    up = np.where(flux >= 0.0, omega[grid.face_cell_a],
                  omega[np.maximum(grid.face_cell_b, 0)])
    return -grid.cell_divergence(flux * up) / grid.cell_area


def stable_dt(state: FlowState, grid: Grid, depth: DepthSamples) -> float:
    """Largest dt keeping the Euler upwind update a convex combination:
    dt <= b_i A_i / (total inflow of cell i)."""
    F = state.velocity.flux
    neg = F < 0.0
    inflow = np.bincount(grid.face_cell_a[neg], weights=-F[neg], minlength=grid.n_cells)
    pos = grid.interior_faces & (F > 0.0)
    inflow += np.bincount(grid.face_cell_b[pos], weights=F[pos], minlength=grid.n_cells)
    cap = depth.b_cell * grid.cell_area
    active = inflow > 0.0
    if not active.any():
        return np.inf
    return float(np.min(cap[active] / inflow[active]))


def step(state: FlowState, spec: LakeSpec, grid: Grid, depth: DepthSamples,
         basis: Optional[HodgeBasis], gamma: float, stepper: TimeStepper,
         dt: Optional[float] = None, tol: float = 1e-10, op=None,
         x0=None) -> FlowState:
    """Advance one time step; dt defaults to cfl * stable_dt."""
    dt_max = stable_dt(state, grid, depth)
    if dt is None:
        if stepper.cfl >= 1.0:
            raise TimeStepTooLarge(
                f"cfl={stepper.cfl} breaks the upwind stability bound (need < 1)")
        dt = stepper.cfl * dt_max
    elif dt > dt_max * (1.0 + 1e-12):
        raise TimeStepTooLarge(f"dt={dt:.3e} exceeds the stable bound {dt_max:.3e}")
    if not np.isfinite(dt) or dt <= 0:
        raise TimeStepTooLarge(f"no positive finite time step (dt={dt})")

    b = depth.b_cell
    if x0 is None:
        x0 = state.velocity.psi0

    def euler(om, vel, h):
        q = b * om + h * _upwind_rate(om, vel.flux, grid)
        return q / b

    om1 = euler(state.omega, state.velocity, dt)
    if stepper.scheme == "euler":
        om_new = om1
    else:
        vel1, _ = reconstruct_velocity(spec, grid, basis, om1, gamma, depth,
                                       tol=tol, x0=x0, op=op)
        om2 = euler(om1, vel1, dt)
        om_new = 0.5 * (state.omega + om2)
        x0 = vel1.psi0
    vel_new, _ = reconstruct_velocity(spec, grid, basis, om_new, gamma, depth,
                                      tol=tol, x0=x0, op=op)
    return FlowState(t=state.t + dt, omega=om_new, velocity=vel_new,
                     alpha=vel_new.alpha)


def evolve(state0: FlowState, T: float, spec: LakeSpec, grid: Grid,
           depth: DepthSamples, basis: Optional[HodgeBasis], gamma: float,
           stepper: TimeStepper, snapshot_every: int = 1, tol: float = 1e-10,
           max_steps: int = 1_000_000):
    """March to time T and return snapshots (always includes t=0 and t=T)."""
    if T < 0:
        raise TimeStepTooLarge("final time must be nonnegative")
    op = assemble(depth, grid, BoundaryValues(
        outer=0.0, island=0.0 if grid.has_island() else None))
    snapshots = [state0]
    state = state0
    prev_psi0 = None
    k = 0
    while state.t < T - 1e-14:
        dt_max = stable_dt(state, grid, depth)
        if stepper.cfl >= 1.0:
            raise TimeStepTooLarge(
                f"cfl={stepper.cfl} breaks the upwind stability bound (need < 1)")
        dt = min(stepper.cfl * dt_max, T - state.t)
        # extrapolated warm start for the stream solve
        x0 = state.velocity.psi0 if prev_psi0 is None else \
            2.0 * state.velocity.psi0 - prev_psi0
        prev_psi0 = state.velocity.psi0
        state = step(state, spec, grid, depth, basis, gamma, stepper, dt=dt,
                     tol=tol, op=op, x0=x0)
        k += 1
        if k > max_steps:
            raise TimeStepTooLarge(f"exceeded {max_steps} steps before t={T}")
        if k % snapshot_every == 0 or state.t >= T - 1e-14:
            snapshots.append(state)
    return snapshots


def flow_diagnostics(state: FlowState, grid: Grid, depth: DepthSamples,
                     chi=None) -> dict:
    """Mass, vorticity bounds, circulation and weighted kinetic energy."""
    q = depth.b_cell * state.omega
    if chi is None:
        chi = default_cutoff(grid)
    gam = generalized_circulation(state.velocity, q, chi, grid)
    d = {
        "t": state.t,
        "mass": float(np.sum(q * grid.cell_area)),
        "max_omega": float(state.omega.max()),
        "min_omega": float(state.omega.min()),
        "gamma": gam,
        "energy": weighted_norm(state.velocity.v, "b", grid, depth),
    }
    state.diagnostics = d
    return d


# ---------------------------------------------------------------------------
# Weak-form residuals
# ---------------------------------------------------------------------------

@dataclass
class ScalarTestFunction:
    value: Callable
    grad: Callable
    dt: Callable


@dataclass
class VectorTestFunction:
    value: Callable
    jacobian: Callable
    dt: Callable


def _w(u):
    u = np.asarray(u, dtype=float)
    c = np.clip(1.0 - u * u, 0.0, None)
    return c ** 3


def _wp(u):
    u = np.asarray(u, dtype=float)
    c = np.clip(1.0 - u * u, 0.0, None)
    return -6.0 * u * c ** 2


def _wpp(u):
    u = np.asarray(u, dtype=float)
    c = np.clip(1.0 - u * u, 0.0, None)
    return c * (30.0 * u * u - 6.0)


def bump_scalar_test(center, radius, t_end, amplitude=1.0) -> ScalarTestFunction:
    """Compactly supported C^2 bump (1-(rho/R)^2)^3 in space times a matching
    decay in time; value 1*amplitude at the center at t=0, zero for t >= t_end."""
    cx, cy = center

    def parts(x, y):
        dx = np.asarray(x, dtype=float) - cx
        dy = np.asarray(y, dtype=float) - cy
        rho = np.hypot(dx, dy)
        u = rho / radius
        return dx, dy, rho, u

    def value(x, y, t):
        _, _, _, u = parts(x, y)
        return amplitude * _w(u) * _w(t / t_end)

    def grad(x, y, t):
        dx, dy, rho, u = parts(x, y)
        safe = np.where(rho > 0, rho, 1.0)
        g = amplitude * _wp(u) / radius * _w(t / t_end)
        return np.stack([g * dx / safe, g * dy / safe], axis=-1)

    def dt(x, y, t):
        _, _, _, u = parts(x, y)
        return amplitude * _w(u) * _wp(t / t_end) / t_end

    return ScalarTestFunction(value=value, grad=grad, dt=dt)


def divfree_bump_test(center, radius, t_end, amplitude=1.0) -> VectorTestFunction:
    """Divergence-free vector bump: perpendicular gradient of the scalar bump.
    Supported in the ball of the given radius around the center."""
    cx, cy = center

    def geom(x, y):
        dx = np.asarray(x, dtype=float) - cx
        dy = np.asarray(y, dtype=float) - cy
        rho = np.hypot(dx, dy)
        safe = np.where(rho > 0, rho, 1.0)
        return dx, dy, rho, safe

    def space_value(x, y):
        dx, dy, rho, safe = geom(x, y)
        gp = amplitude * _wp(rho / radius) / radius
        # grad_perp g = (-g_y, g_x)
        return np.stack([-gp * dy / safe, gp * dx / safe], axis=-1)

    def space_jacobian(x, y):
        dx, dy, rho, safe = geom(x, y)
        u = rho / radius
        gp = amplitude * _wp(u) / radius
        gpp = amplitude * _wpp(u) / radius ** 2
        nx, ny = dx / safe, dy / safe
        g_xx = gpp * nx * nx + gp * ny * ny / safe
        g_yy = gpp * ny * ny + gp * nx * nx / safe
        g_xy = (gpp - gp / safe) * nx * ny
        # J[k, l] = d_k Phi_l with Phi = (-g_y, g_x)
        J = np.empty(np.shape(safe) + (2, 2))
        J[..., 0, 0] = -g_xy
        J[..., 0, 1] = g_xx
        J[..., 1, 0] = -g_yy
        J[..., 1, 1] = g_xy
        return J

    def value(x, y, t):
        return space_value(x, y) * _w(t / t_end)

    def jacobian(x, y, t):
        return space_jacobian(x, y) * _w(t / t_end)

    def dt(x, y, t):
        return space_value(x, y) * (_wp(t / t_end) / t_end)

    return VectorTestFunction(value=value, jacobian=jacobian, dt=dt)


def _boundary_cells(grid: Grid):
    # pole faces are not a physical boundary, only a coordinate artifact
    shore = ~grid.interior_faces & (grid.face_tag != POLE)
    return np.unique(grid.face_cell_a[shore])


def _trapezoid_weights(times):
    t = np.asarray(times, dtype=float)
    w = np.zeros_like(t)
    w[:-1] += 0.5 * np.diff(t)
    w[1:] += 0.5 * np.diff(t)
    return w


def weak_vorticity_residual(snapshots, phi: ScalarTestFunction, grid: Grid,
                            depth: DepthSamples) -> float:
    """Quadrature of int int (dPhi/dt) b w + int int grad Phi . b v w
    + int b w0 Phi(0); small for converged runs."""
    x, y = grid.cell_x, grid.cell_y
    A = grid.cell_area
    b = depth.b_cell
    scale = float(np.abs(phi.value(x, y, 0.0)).max()) or 1.0
    bc = _boundary_cells(grid)
    times = [s.t for s in snapshots]
    w = _trapezoid_weights(times)
    if float(np.abs(phi.value(x, y, times[-1])).max()) > 1e-10 * scale:
        raise BadTestFunction("test function must vanish by the final snapshot time")
    total = 0.0
    for wn, s in zip(w, snapshots):
        val = phi.value(x, y, s.t)
        if np.abs(val[bc]).max() > 1e-10 * scale:
            raise BadTestFunction("test function support touches the boundary cells")
        q = b * s.omega
        total += wn * float(np.sum(phi.dt(x, y, s.t) * q * A))
        gv = phi.grad(x, y, s.t)
        bvw = (b * s.omega)[:, None] * s.velocity.v
        total += wn * float(np.sum(np.sum(gv * bvw, axis=1) * A))
    total += float(np.sum(b * snapshots[0].omega * phi.value(x, y, 0.0) * A))
    return total


def weak_velocity_residual(snapshots, phi: VectorTestFunction, grid: Grid,
                           depth: DepthSamples) -> float:
    """Quadrature of int int v . dPhi/dt + (b v x v) : grad(Phi/b)
    + int v0 . Phi(0) for divergence-free Phi supported away from the
    degenerate center and the shores."""
    x, y = grid.cell_x, grid.cell_y
    A = grid.cell_area
    b = depth.b_cell
    J0 = phi.jacobian(x, y, 0.0)
    div = J0[..., 0, 0] + J0[..., 1, 1]
    scale = float(np.abs(phi.value(x, y, 0.0)).max()) or 1.0
    if float(np.abs(div).max()) > 1e-10 * scale:
        raise BadTestFunction("test function is not divergence-free")
    bc = _boundary_cells(grid)
    times = [s.t for s in snapshots]
    if float(np.abs(phi.value(x, y, times[-1])).max()) > 1e-10 * scale:
        raise BadTestFunction("test function must vanish by the final snapshot time")
    # the weak velocity form lives on the punctured domain: keep the support
    # off the innermost cells around the center
    inner = np.argsort(grid.cell_r)[: (grid.n_theta or 4)]
    if float(np.abs(phi.value(x[inner], y[inner], 0.0)).max()) > 1e-10 * scale:
        raise BadTestFunction("test function support must exclude the center")
    # cell gradient of the depth for grad(Phi/b) = J/b - Phi (x) grad b / b^2
    _, grad_b = gradient(depth.b_cell, grid, bc=None)
    w = _trapezoid_weights(times)
    total = 0.0
    for wn, s in zip(w, snapshots):
        val = phi.value(x, y, s.t)
        if np.abs(val[bc]).max() > 1e-10 * scale:
            raise BadTestFunction("test function support touches the boundary cells")
        v = s.velocity.v
        total += wn * float(np.sum(np.sum(v * phi.dt(x, y, s.t), axis=1) * A))
        J = phi.jacobian(x, y, s.t)
        # G[k, l] = d_k (Phi_l / b)
        G = J / b[:, None, None] - grad_b[:, :, None] * val[:, None, :] / (b ** 2)[:, None, None]
        conv = b * np.einsum("ik,il,ikl->i", v, v, G)
        total += wn * float(np.sum(conv * A))
    total += float(np.sum(np.sum(snapshots[0].velocity.v * phi.value(x, y, 0.0), axis=1) * A))
    return total
