"""Lakes: domains, depth laws, cutoffs and epsilon-sequences.

A lake is a bounded planar domain together with a nonnegative depth b. The
depth may vanish at the outer shore (exponent a0) and/or at one interior
point (exponent a1), which makes the stream-function problem degenerate.
Everything here is plain geometry and pointwise depth evaluation; grids and
quadrature live in :mod:`lakelab.grid`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import BadCutoff, InvalidDepth, InvalidSequence

__all__ = [
    "Disk",
    "Annulus",
    "MaskedJordan",
    "Flat",
    "PowerRadial",
    "Flooded",
    "Raised",
    "Volcano",
    "Tabulated",
    "LakeSpec",
    "CutoffChi",
    "quintic_step",
    "make_eps_sequence",
]


# ---------------------------------------------------------------------------
# Domains
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Disk:
    radius: float = 1.0

    def __post_init__(self):
        if self.radius <= 0:
            raise InvalidDepth(f"disk radius must be positive, got {self.radius}")


@dataclass(frozen=True)
class Annulus:
    r_in: float
    r_out: float = 1.0

    def __post_init__(self):
        if not 0 < self.r_in < self.r_out:
            raise InvalidDepth(f"annulus needs 0 < r_in < r_out, got ({self.r_in}, {self.r_out})")


@dataclass(frozen=True)
class MaskedJordan:
    """Cell-centered mask over a uniform Cartesian lattice (staircase boundary).

    ``mask[ix, iy]`` is True on wet cells; the cell (ix, iy) is centered at
    ``origin + h*(ix+1/2, iy+1/2)``.
    """

    mask: np.ndarray
    h: float
    origin: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        if self.h <= 0:
            raise InvalidDepth("mask cell size must be positive")
        if self.mask.ndim != 2 or not self.mask.any():
            raise InvalidDepth("mask must be a non-empty 2D boolean array")

    def __hash__(self):  # arrays are not hashable; identity is fine here
        return id(self)


# ---------------------------------------------------------------------------
# Depth laws
# ---------------------------------------------------------------------------

def _radius(x, y):
    return np.hypot(x, y)


@dataclass(frozen=True)
class Flat:
    const: float = 1.0

    def __call__(self, x, y):
        return np.full_like(np.asarray(x, dtype=float), self.const)


@dataclass(frozen=True)
class PowerRadial:
    """b = |x|^alpha, vanishing at the origin (the degenerate point)."""

    alpha: float

    def __call__(self, x, y):
        return _radius(x, y) ** self.alpha


@dataclass(frozen=True)
class Flooded:
    """b_eps = base - eps; wet region is {base > eps} (rising water level)."""

    base: "DepthLaw"
    eps: float

    def __call__(self, x, y):
        return self.base(x, y) - self.eps


@dataclass(frozen=True)
class Raised:
    """b_eps = base + eps (falling water level, island-free for eps > 0)."""

    base: "DepthLaw"
    eps: float

    def __call__(self, x, y):
        return self.base(x, y) + self.eps


@dataclass(frozen=True)
class Volcano:
    """Submarine mound: (|x|^2 + eps)^(alpha/2) near the center, blended into
    |x|^alpha outside a cutoff of radius eta_radius."""

    alpha: float
    eps: float
    eta_radius: float

    def __call__(self, x, y):
        r = _radius(x, y)
        eta = 1.0 - quintic_step((r - self.eta_radius) / self.eta_radius)
        core = (r * r + self.eps) ** (self.alpha / 2.0)
        return eta * core + (1.0 - eta) * r ** self.alpha


@dataclass(frozen=True)
class Tabulated:
    """Depth given by bilinear interpolation of samples on a regular lattice.

    ``values[ix, iy]`` is the sample at ``(x0 + ix*dx, y0 + iy*dy)``.
    """

    x0: float
    y0: float
    dx: float
    dy: float
    values: np.ndarray

    def __call__(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        v = self.values
        fx = np.clip((x - self.x0) / self.dx, 0.0, v.shape[0] - 1.0)
        fy = np.clip((y - self.y0) / self.dy, 0.0, v.shape[1] - 1.0)
        ix = np.minimum(fx.astype(int), v.shape[0] - 2)
        iy = np.minimum(fy.astype(int), v.shape[1] - 2)
        tx = fx - ix
        ty = fy - iy
        return ((1 - tx) * (1 - ty) * v[ix, iy] + tx * (1 - ty) * v[ix + 1, iy]
                + (1 - tx) * ty * v[ix, iy + 1] + tx * ty * v[ix + 1, iy + 1])

    def __hash__(self):
        return id(self)


DepthLaw = Flat | PowerRadial | Flooded | Raised | Volcano | Tabulated
Domain = Disk | Annulus | MaskedJordan


def _infer_a1(law) -> float:
    """Interior-degeneracy exponent of a depth law, 0 if the center stays wet."""
    if isinstance(law, PowerRadial):
        return law.alpha
    if isinstance(law, Flooded):
        base = _infer_a1(law.base)
        # b - eps vanishes with the slope of b at the island rim: unit exponent
        return 1.0 if base > 0 else 0.0
    if isinstance(law, Volcano):
        return law.alpha
    return 0.0


# ---------------------------------------------------------------------------
# Lake specification
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LakeSpec:
    """A lake: domain, depth law and shore exponents.

    ``a0`` is the outer-shore exponent, ``a1`` the exponent at the interior
    degenerate point (0 when the depth stays positive there). ``c_floor`` is
    the lower bound of the shore-law prefactor; the implemented laws all use
    prefactor 1.
    """

    domain: Domain
    depth_law: DepthLaw
    a0: float = 0.0
    a1: Optional[float] = None
    c_floor: float = 1.0

    def __post_init__(self):
        if self.a1 is None:
            object.__setattr__(self, "a1", _infer_a1(self.depth_law))
        if self.a0 < 0:
            raise InvalidDepth(f"outer shore exponent must be >= 0, got {self.a0}")
        if self.c_floor <= 0:
            raise InvalidDepth(f"depth prefactor floor must be positive, got {self.c_floor}")
        if self.is_punctured and not 0.0 < self.a1 < 2.0:
            raise InvalidDepth(
                f"punctured lake needs interior exponent in (0, 2), got {self.a1}")

    @property
    def is_punctured(self) -> bool:
        """True when the depth vanishes at an interior point of the domain."""
        if isinstance(self.domain, Annulus):
            return False
        law = self.depth_law
        if isinstance(law, (PowerRadial, Volcano)):
            return law(0.0, 0.0) == 0.0
        return False

    @property
    def outer_radius(self) -> float:
        if isinstance(self.domain, Disk):
            return self.domain.radius
        if isinstance(self.domain, Annulus):
            return self.domain.r_out
        m = self.domain
        return 0.5 * max(m.mask.shape) * m.h

    def depth(self, x, y):
        return self.depth_law(x, y)


# ---------------------------------------------------------------------------
# Radial cutoffs
# ---------------------------------------------------------------------------

def quintic_step(t):
    """C^2 monotone step: 0 for t <= 0, 1 for t >= 1, 6t^5-15t^4+10t^3 between."""
    t = np.clip(np.asarray(t, dtype=float), 0.0, 1.0)
    return t * t * t * (t * (6.0 * t - 15.0) + 10.0)


def _quintic_step_deriv(t):
    t = np.asarray(t, dtype=float)
    tc = np.clip(t, 0.0, 1.0)
    d = 30.0 * tc * tc * (tc - 1.0) ** 2
    return np.where((t > 0.0) & (t < 1.0), d, 0.0)


@dataclass(frozen=True)
class CutoffChi:
    """Radial plateau cutoff: 1 on B(0, delta), 0 outside B(0, outer).

    By default ``outer = 2*delta``; a tighter outer radius is allowed so the
    cutoff also fits lakes whose island fills a large part of the domain.
    """

    delta: float
    outer: Optional[float] = None

    def __post_init__(self):
        if self.outer is None:
            object.__setattr__(self, "outer", 2.0 * self.delta)
        if not 0 < self.delta < self.outer:
            raise BadCutoff(f"need 0 < delta < outer, got ({self.delta}, {self.outer})")

    def value(self, x, y):
        r = _radius(x, y)
        return 1.0 - quintic_step((r - self.delta) / (self.outer - self.delta))

    def grad_perp(self, x, y):
        """Perpendicular gradient (-d_y chi, d_x chi) as an (n, 2) array."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        r = _radius(x, y)
        w = self.outer - self.delta
        dchi = -_quintic_step_deriv((r - self.delta) / w) / w
        safe = np.where(r > 0, r, 1.0)
        # unit azimuthal direction is (-y, x)/r
        return np.stack([-y / safe * dchi, x / safe * dchi], axis=-1)


def probe_cutoff(rho: float, width: float) -> CutoffChi:
    """Symmetric band cutoff around radius rho: 1 inside rho-width, 0 outside
    rho+width. Centering the transition on rho makes band quadrature of a
    smooth integrand second-order accurate in the width."""
    if width <= 0 or width >= rho:
        raise BadCutoff(f"probe band needs 0 < width < rho, got ({width}, {rho})")
    return CutoffChi(delta=rho - width, outer=rho + width)


# ---------------------------------------------------------------------------
# Epsilon sequences
# ---------------------------------------------------------------------------

def island_radius(law: DepthLaw, eps: float, r_max: float) -> float:
    """Radius of the sunken region {b <= eps} of a radial depth law."""
    if isinstance(law, PowerRadial):
        return eps ** (1.0 / law.alpha)
    lo, hi = 0.0, r_max
    if law(hi, 0.0) <= eps:
        raise InvalidSequence(f"eps={eps} floods the whole lake")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if law(mid, 0.0) <= eps:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def make_eps_sequence(spec: LakeSpec, mode: str, eps_list, depth: str = "restrict"):
    """Derive the lakes of a shrinking-island or rising-bottom family.

    ``mode='evanescent'`` returns annular lakes whose island {b <= eps}
    shrinks with eps; ``depth`` selects the member depth: ``'restrict'``
    keeps b of the base lake on the wet annulus, ``'flooded'`` uses b - eps.
    ``mode='emergent'`` returns island-free lakes with depth b + eps on the
    same domain.
    """
    eps_list = [float(e) for e in eps_list]
    if not eps_list:
        return []
    if any(e <= 0 for e in eps_list):
        raise InvalidSequence("eps values must be positive")
    if list(eps_list) != sorted(eps_list, reverse=True) or len(set(eps_list)) != len(eps_list):
        raise InvalidSequence("eps values must be strictly decreasing")

    if mode == "evanescent":
        if not spec.is_punctured:
            raise InvalidSequence("evanescent sequences need a punctured base lake")
        if depth not in ("restrict", "flooded"):
            raise InvalidSequence(f"unknown evanescent depth mode {depth!r}")
        r_out = spec.outer_radius
        members = []
        for eps in eps_list:
            r_isl = island_radius(spec.depth_law, eps, r_out)
            if r_isl >= r_out:
                raise InvalidSequence(f"eps={eps} island touches the outer shore")
            law = spec.depth_law if depth == "restrict" else Flooded(spec.depth_law, eps)
            members.append(LakeSpec(domain=Annulus(r_isl, r_out), depth_law=law,
                                    a0=spec.a0, a1=spec.a1, c_floor=spec.c_floor))
        return members

    if mode == "emergent":
        members = []
        for eps in eps_list:
            law = Raised(spec.depth_law, eps)
            members.append(LakeSpec(domain=spec.domain, depth_law=law,
                                    a0=0.0, a1=0.0, c_floor=spec.c_floor))
        return members

    raise InvalidSequence(f"unknown sequence mode {mode!r}")
