"""Finite-volume grids: polar tensor meshes and masked Cartesian meshes.

Both grid kinds expose the same flat arrays: cells (centers, areas), faces
(adjacent cells, length, center distance, unit normal, tag) and vertices.
Vertices carry the staggered stream function: the volume flux of b*v through
a face equals the difference of the stream values at its two endpoints, so
the discrete divergence of any vertex-generated flux field telescopes to
zero around every cell. Conventions:

* ``face_cell_a`` -> ``face_cell_b`` is the direction of the stored unit
  normal; boundary faces have ``face_cell_b == -1`` and an outward normal.
* ``flux = psi[face_v1] - psi[face_v2]`` where the edge v1 -> v2 runs along
  the counterclockwise rotation of the face normal.

Cell and face arrays are flat; ``cell_ij`` keeps the structured (ring,
sector) or (ix, iy) index for CSV export.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.sparse as sp

from .errors import InvalidDepth
from .geometry import Annulus, Disk, LakeSpec, MaskedJordan

__all__ = ["Grid", "polar_grid", "cartesian_masked_grid", "grid_for", "disk_mask",
           "INTERIOR", "OUTER", "ISLAND", "POLE"]

INTERIOR, OUTER, ISLAND, POLE = 0, 1, 2, 3


@dataclass
class Grid:
    kind: str
    # cells
    cell_x: np.ndarray
    cell_y: np.ndarray
    cell_area: np.ndarray
    cell_ij: np.ndarray
    # faces
    face_cell_a: np.ndarray
    face_cell_b: np.ndarray
    face_len: np.ndarray
    face_dist: np.ndarray
    face_nx: np.ndarray
    face_ny: np.ndarray
    face_x: np.ndarray
    face_y: np.ndarray
    face_tag: np.ndarray
    face_v1: np.ndarray
    face_v2: np.ndarray
    # vertices
    vert_x: np.ndarray
    vert_y: np.ndarray
    vert_kind: np.ndarray
    vert_weights: sp.csr_matrix
    # reference area of the discrete domain (exact annulus / counted squares)
    ref_area: float
    # polar metadata (None on cartesian grids)
    n_r: Optional[int] = None
    n_theta: Optional[int] = None
    r_faces: Optional[np.ndarray] = None
    theta_faces: Optional[np.ndarray] = None
    _lsq_minv: Optional[np.ndarray] = field(default=None, repr=False)

    # -- basic sizes ------------------------------------------------------
    @property
    def n_cells(self) -> int:
        return self.cell_x.size

    @property
    def n_faces(self) -> int:
        return self.face_len.size

    @property
    def n_verts(self) -> int:
        return self.vert_x.size

    @property
    def cell_r(self) -> np.ndarray:
        return np.hypot(self.cell_x, self.cell_y)

    @property
    def interior_faces(self) -> np.ndarray:
        return self.face_cell_b >= 0

    def has_island(self) -> bool:
        return bool(np.any(self.face_tag == ISLAND))

    # -- staggered stream machinery ----------------------------------------
    def vertex_stream(self, psi_cells, outer_value=0.0, island_value=0.0):
        """Interpolate a cell stream function to vertices, imposing the
        constant boundary values on each boundary component."""
        psi_v = np.asarray(self.vert_weights @ np.asarray(psi_cells, dtype=float))
        psi_v[self.vert_kind == OUTER] = outer_value
        psi_v[self.vert_kind == ISLAND] = island_value
        return psi_v

    def flux_from_vertex_stream(self, psi_v):
        return psi_v[self.face_v1] - psi_v[self.face_v2]

    def cell_divergence(self, flux):
        """Signed sum of face fluxes per cell (outward positive)."""
        div = np.bincount(self.face_cell_a, weights=flux, minlength=self.n_cells)
        interior = self.interior_faces
        div -= np.bincount(self.face_cell_b[interior], weights=flux[interior],
                           minlength=self.n_cells)
        return div

    # -- least-squares reconstruction of cell vectors -----------------------
    def _lsq_inverse(self):
        if self._lsq_minv is None:
            w = self.face_len
            m11 = np.zeros(self.n_cells)
            m12 = np.zeros(self.n_cells)
            m22 = np.zeros(self.n_cells)
            for cells in (self.face_cell_a, self.face_cell_b):
                ok = cells >= 0
                np.add.at(m11, cells[ok], (w * self.face_nx ** 2)[ok])
                np.add.at(m12, cells[ok], (w * self.face_nx * self.face_ny)[ok])
                np.add.at(m22, cells[ok], (w * self.face_ny ** 2)[ok])
            det = m11 * m22 - m12 ** 2
            self._lsq_minv = np.stack([m22 / det, -m12 / det, m11 / det], axis=1)
        return self._lsq_minv

    def cells_from_face_normals(self, u_normal, face_mask=None):
        """Least-squares cell vectors from normal components on faces.

        ``u_normal[f]`` is the component along the stored face normal; the
        same scalar is seen from both adjacent cells. Faces with zero length
        (pole) drop out automatically; ``face_mask`` removes faces from both
        the normal matrix and the right-hand side.
        """
        w = self.face_len if face_mask is None else self.face_len * face_mask
        wx = w * self.face_nx * u_normal
        wy = w * self.face_ny * u_normal
        bx = np.zeros(self.n_cells)
        by = np.zeros(self.n_cells)
        for cells in (self.face_cell_a, self.face_cell_b):
            ok = cells >= 0
            bx += np.bincount(cells[ok], weights=wx[ok], minlength=self.n_cells)
            by += np.bincount(cells[ok], weights=wy[ok], minlength=self.n_cells)
        if face_mask is None:
            minv = self._lsq_inverse()
        else:
            m11 = np.zeros(self.n_cells)
            m12 = np.zeros(self.n_cells)
            m22 = np.zeros(self.n_cells)
            for cells in (self.face_cell_a, self.face_cell_b):
                ok = cells >= 0
                m11 += np.bincount(cells[ok], weights=(w * self.face_nx ** 2)[ok],
                                   minlength=self.n_cells)
                m12 += np.bincount(cells[ok], weights=(w * self.face_nx * self.face_ny)[ok],
                                   minlength=self.n_cells)
                m22 += np.bincount(cells[ok], weights=(w * self.face_ny ** 2)[ok],
                                   minlength=self.n_cells)
            det = m11 * m22 - m12 ** 2
            minv = np.stack([m22 / det, -m12 / det, m11 / det], axis=1)
        vx = minv[:, 0] * bx + minv[:, 1] * by
        vy = minv[:, 1] * bx + minv[:, 2] * by
        return np.stack([vx, vy], axis=1)


# ---------------------------------------------------------------------------
# Polar tensor grids
# ---------------------------------------------------------------------------

def _ring_radii(n_r, r_in, r_out, grading):
    if grading == "uniform":
        return np.linspace(r_in, r_out, n_r + 1)
    if grading == "geometric":
        if r_in <= 0:
            raise InvalidDepth("geometric grading needs r_in > 0")
        return np.geomspace(r_in, r_out, n_r + 1)
    raise InvalidDepth(f"unknown grading {grading!r}")


def polar_grid(n_r, n_theta, r_in, r_out, grading="uniform") -> Grid:
    """Annular sector mesh; ``r_in == 0`` gives a full disk with a flux-free
    pole (innermost faces have zero length)."""
    if n_r < 1 or n_theta < 3:
        raise InvalidDepth("polar grid needs n_r >= 1 and n_theta >= 3")
    if r_in < 0 or r_out <= r_in:
        raise InvalidDepth(f"polar grid needs 0 <= r_in < r_out, got ({r_in}, {r_out})")
    rf = _ring_radii(n_r, r_in, r_out, grading)
    dth = 2.0 * np.pi / n_theta
    thf = np.arange(n_theta + 1) * dth
    rc = 0.5 * (rf[:-1] + rf[1:])
    thc = thf[:-1] + 0.5 * dth

    ii, jj = np.meshgrid(np.arange(n_r), np.arange(n_theta), indexing="ij")
    cell_ij = np.stack([ii.ravel(), jj.ravel()], axis=1)
    R = rc[ii].ravel()
    TH = thc[jj].ravel()
    cell_x = R * np.cos(TH)
    cell_y = R * np.sin(TH)
    cell_area = (0.5 * (rf[1:] ** 2 - rf[:-1] ** 2)[:, None] * dth
                 * np.ones((1, n_theta))).ravel()

    def cid(i, j):
        return i * n_theta + np.mod(j, n_theta)

    is_disk = rf[0] == 0.0

    # vertices: rings 0..n_r x sectors, with a single shared pole on disks
    if is_disk:
        n_verts = 1 + n_r * n_theta

        def vid(i, j):
            i = np.asarray(i)
            j = np.mod(np.asarray(j), n_theta)
            return np.where(i == 0, 0, 1 + (i - 1) * n_theta + j)
    else:
        n_verts = (n_r + 1) * n_theta

        def vid(i, j):
            return np.asarray(i) * n_theta + np.mod(np.asarray(j), n_theta)

    vi, vj = np.meshgrid(np.arange(n_r + 1), np.arange(n_theta), indexing="ij")
    vert_x = np.zeros(n_verts)
    vert_y = np.zeros(n_verts)
    flat = vid(vi, vj).ravel()
    vert_x[flat] = (rf[vi] * np.cos(thf[vj])).ravel()
    vert_y[flat] = (rf[vi] * np.sin(thf[vj])).ravel()
    vert_kind = np.full(n_verts, INTERIOR, dtype=int)
    vert_kind[vid(np.full(n_theta, n_r), np.arange(n_theta))] = OUTER
    inner_kind = POLE if is_disk else ISLAND
    vert_kind[vid(np.zeros(n_theta, dtype=int), np.arange(n_theta))] = inner_kind

    # vertex averaging weights (linear in r between the two adjacent rings)
    rows, cols, vals = [], [], []
    for i in range(1, n_r):
        w_in = (rc[i] - rf[i]) / (rc[i] - rc[i - 1])
        for j in range(n_theta):
            v = int(vid(i, j))
            for jj2, cw in ((j - 1, 0.5), (j, 0.5)):
                rows += [v, v]
                cols += [int(cid(i - 1, jj2)), int(cid(i, jj2))]
                vals += [w_in * cw, (1.0 - w_in) * cw]
    if is_disk:
        for j in range(n_theta):
            rows.append(0)
            cols.append(int(cid(0, j)))
            vals.append(1.0 / n_theta)
    vert_weights = sp.csr_matrix((vals, (rows, cols)), shape=(n_verts, n_r * n_theta))

    # faces --------------------------------------------------------------
    fa, fb, fl, fd, fnx, fny, fx, fy, ftag, fv1, fv2 = ([] for _ in range(11))
    j_arr = np.arange(n_theta)
    cos_c, sin_c = np.cos(thc), np.sin(thc)

    def add_radial(i, tag):
        # faces on ring boundary i, one per sector
        arc = rf[i] * dth
        if tag == INTERIOR:
            a = cid(i - 1, j_arr)
            b = cid(i, j_arr)
            dist = np.full(n_theta, rc[i] - rc[i - 1])
            nx, ny = cos_c, sin_c
            v1, v2 = vid(np.full(n_theta, i), j_arr), vid(np.full(n_theta, i), j_arr + 1)
        elif tag == OUTER:
            a = cid(n_r - 1, j_arr)
            b = np.full(n_theta, -1)
            dist = np.full(n_theta, rf[n_r] - rc[n_r - 1])
            nx, ny = cos_c, sin_c
            v1, v2 = vid(np.full(n_theta, n_r), j_arr), vid(np.full(n_theta, n_r), j_arr + 1)
        else:  # inner boundary: outward normal points toward the center
            a = cid(0, j_arr)
            b = np.full(n_theta, -1)
            dist = np.full(n_theta, max(rc[0] - rf[0], 1e-300))
            nx, ny = -cos_c, -sin_c
            v1, v2 = vid(np.zeros(n_theta, int), j_arr + 1), vid(np.zeros(n_theta, int), j_arr)
        fa.append(a)
        fb.append(b)
        fl.append(np.full(n_theta, arc))
        fd.append(dist)
        fnx.append(nx)
        fny.append(ny)
        fx.append(rf[i] * cos_c)
        fy.append(rf[i] * sin_c)
        ftag.append(np.full(n_theta, tag))
        fv1.append(v1)
        fv2.append(v2)

    add_radial(0, POLE if is_disk else ISLAND)
    for i in range(1, n_r):
        add_radial(i, INTERIOR)
    add_radial(n_r, OUTER)

    # azimuthal faces: between sector j-1 and j within each ring (periodic)
    cos_f, sin_f = np.cos(thf[:-1]), np.sin(thf[:-1])
    for i in range(n_r):
        fa.append(cid(i, j_arr - 1))
        fb.append(cid(i, j_arr))
        fl.append(np.full(n_theta, rf[i + 1] - rf[i]))
        fd.append(np.full(n_theta, rc[i] * dth))
        fnx.append(-sin_f)
        fny.append(cos_f)
        fx.append(rc[i] * cos_f)
        fy.append(rc[i] * sin_f)
        ftag.append(np.full(n_theta, INTERIOR))
        fv1.append(vid(np.full(n_theta, i + 1), j_arr))
        fv2.append(vid(np.full(n_theta, i), j_arr))

    grid = Grid(
        kind="polar",
        cell_x=cell_x, cell_y=cell_y, cell_area=cell_area, cell_ij=cell_ij,
        face_cell_a=np.concatenate(fa).astype(int),
        face_cell_b=np.concatenate(fb).astype(int),
        face_len=np.concatenate(fl), face_dist=np.concatenate(fd),
        face_nx=np.concatenate(fnx), face_ny=np.concatenate(fny),
        face_x=np.concatenate(fx), face_y=np.concatenate(fy),
        face_tag=np.concatenate(ftag).astype(int),
        face_v1=np.concatenate(fv1).astype(int),
        face_v2=np.concatenate(fv2).astype(int),
        vert_x=vert_x, vert_y=vert_y, vert_kind=vert_kind,
        vert_weights=vert_weights,
        ref_area=np.pi * (rf[-1] ** 2 - rf[0] ** 2),
        n_r=n_r, n_theta=n_theta, r_faces=rf, theta_faces=thf,
    )
    return grid


# ---------------------------------------------------------------------------
# Masked Cartesian grids
# ---------------------------------------------------------------------------

def cartesian_masked_grid(mask, h, origin=(0.0, 0.0)) -> Grid:
    """Cell-centered masked lattice with a staircase outer boundary."""
    mask = np.asarray(mask, dtype=bool)
    nx, ny = mask.shape
    idx = -np.ones((nx, ny), dtype=int)
    act = np.argwhere(mask)
    idx[mask] = np.arange(act.shape[0])
    n_cells = act.shape[0]
    if n_cells == 0:
        raise InvalidDepth("mask has no active cells")
    x0, y0 = origin
    cell_x = x0 + (act[:, 0] + 0.5) * h
    cell_y = y0 + (act[:, 1] + 0.5) * h
    cell_area = np.full(n_cells, h * h)

    # vertices: lattice nodes adjacent to at least one active cell
    node_used = np.zeros((nx + 1, ny + 1), dtype=bool)
    for dx, dy in ((0, 0), (1, 0), (0, 1), (1, 1)):
        node_used[act[:, 0] + dx, act[:, 1] + dy] = True
    vmap = -np.ones((nx + 1, ny + 1), dtype=int)
    vnodes = np.argwhere(node_used)
    vmap[node_used] = np.arange(vnodes.shape[0])
    vert_x = x0 + vnodes[:, 0] * h
    vert_y = y0 + vnodes[:, 1] * h

    padded = np.zeros((nx + 2, ny + 2), dtype=bool)
    padded[1:-1, 1:-1] = mask
    # a node is interior when all four touching cells are active
    corner_full = (padded[:-1, :-1] & padded[1:, :-1] & padded[:-1, 1:] & padded[1:, 1:])
    vert_kind = np.where(corner_full[vnodes[:, 0], vnodes[:, 1]], INTERIOR, OUTER)

    rows, cols, vals = [], [], []
    for k, (ix, iy) in enumerate(vnodes):
        adj = [(ix - 1, iy - 1), (ix, iy - 1), (ix - 1, iy), (ix, iy)]
        cells = [idx[a, b] for a, b in adj if 0 <= a < nx and 0 <= b < ny and idx[a, b] >= 0]
        for c in cells:
            rows.append(k)
            cols.append(c)
            vals.append(1.0 / len(cells))
    vert_weights = sp.csr_matrix((vals, (rows, cols)), shape=(vnodes.shape[0], n_cells))

    fa, fb, fnx, fny, fx, fy, ftag, fv1, fv2, fdist = ([] for _ in range(10))

    def add_face(ca, cb, nxv, nyv, cx, cy, v1, v2):
        boundary = cb < 0
        fa.append(ca)
        fb.append(cb)
        fnx.append(nxv)
        fny.append(nyv)
        fx.append(cx)
        fy.append(cy)
        ftag.append(OUTER if boundary else INTERIOR)
        fv1.append(v1)
        fv2.append(v2)
        fdist.append(0.5 * h if boundary else h)

    # x-normal faces at lattice lines ix = 0..nx
    for ix in range(nx + 1):
        for iy in range(ny):
            left = idx[ix - 1, iy] if ix > 0 else -1
            right = idx[ix, iy] if ix < nx else -1
            if left < 0 and right < 0:
                continue
            cx = x0 + ix * h
            cy = y0 + (iy + 0.5) * h
            vb, vt = vmap[ix, iy], vmap[ix, iy + 1]
            if left >= 0 and right >= 0:
                add_face(left, right, 1.0, 0.0, cx, cy, vb, vt)
            elif left >= 0:  # outward +x
                add_face(left, -1, 1.0, 0.0, cx, cy, vb, vt)
            else:  # outward -x: flux = psi[top] - psi[bottom]
                add_face(right, -1, -1.0, 0.0, cx, cy, vt, vb)
    # y-normal faces at lattice lines iy = 0..ny
    for iy in range(ny + 1):
        for ix in range(nx):
            bot = idx[ix, iy - 1] if iy > 0 else -1
            top = idx[ix, iy] if iy < ny else -1
            if bot < 0 and top < 0:
                continue
            cx = x0 + (ix + 0.5) * h
            cy = y0 + iy * h
            vl, vr = vmap[ix, iy], vmap[ix + 1, iy]
            if bot >= 0 and top >= 0:
                add_face(bot, top, 0.0, 1.0, cx, cy, vr, vl)
            elif bot >= 0:  # outward +y
                add_face(bot, -1, 0.0, 1.0, cx, cy, vr, vl)
            else:  # outward -y
                add_face(top, -1, 0.0, -1.0, cx, cy, vl, vr)

    n_f = len(fa)
    return Grid(
        kind="cartesian",
        cell_x=cell_x, cell_y=cell_y, cell_area=cell_area, cell_ij=act.copy(),
        face_cell_a=np.array(fa, dtype=int), face_cell_b=np.array(fb, dtype=int),
        face_len=np.full(n_f, h), face_dist=np.array(fdist),
        face_nx=np.array(fnx), face_ny=np.array(fny),
        face_x=np.array(fx), face_y=np.array(fy),
        face_tag=np.array(ftag, dtype=int),
        face_v1=np.array(fv1, dtype=int), face_v2=np.array(fv2, dtype=int),
        vert_x=vert_x, vert_y=vert_y, vert_kind=vert_kind,
        vert_weights=vert_weights,
        ref_area=n_cells * h * h,
    )


def disk_mask(n, radius=1.0):
    """Boolean n x n mask of the disk of given radius centered in the square
    [-radius, radius]^2; returns (mask, h, origin)."""
    h = 2.0 * radius / n
    c = (np.arange(n) + 0.5) * h - radius
    xx, yy = np.meshgrid(c, c, indexing="ij")
    return (xx ** 2 + yy ** 2 < radius ** 2), h, (-radius, -radius)


def grid_for(spec: LakeSpec, n_r=128, n_theta=64, grading="uniform") -> Grid:
    """Build the natural grid for a lake's domain."""
    dom = spec.domain
    if isinstance(dom, Disk):
        return polar_grid(n_r, n_theta, 0.0, dom.radius, grading="uniform")
    if isinstance(dom, Annulus):
        return polar_grid(n_r, n_theta, dom.r_in, dom.r_out, grading=grading)
    if isinstance(dom, MaskedJordan):
        return cartesian_masked_grid(dom.mask, dom.h, dom.origin)
    raise InvalidDepth(f"unsupported domain {dom!r}")
