"""Periodic square-lattice geometry and Kac-normalized power-law couplings.

Sites of the L x L torus are indexed site = x + L*y.  Displacements between
sites follow the minimum-image convention with components in (-L/2, L/2];
at half period (even L) the positive component +L/2 is the canonical choice.
The interaction weight of a displacement is r^(-alpha); alpha = math.inf is
the nearest-neighbor limit (weight 1 at r = 1, 0 beyond).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

__all__ = [
    "Displacement",
    "LatticeSpec",
    "min_image_disp",
    "kac_norm",
    "enumerate_displacements",
    "site_coords",
    "coords_site",
]


def _canonical_component(c: int, L: int) -> int:
    c %= L
    return c if c <= L // 2 else c - L


@dataclass(frozen=True, order=True)
class Displacement:
    """Canonical minimum-image displacement with integer components."""

    dx: int
    dy: int

    @property
    def r2(self) -> int:
        return self.dx * self.dx + self.dy * self.dy

    @property
    def distance(self) -> float:
        return math.sqrt(self.r2)

    def canonicalize(self, L: int) -> "Displacement":
        return Displacement(_canonical_component(self.dx, L),
                            _canonical_component(self.dy, L))

    def negate(self, L: int) -> "Displacement":
        return Displacement(_canonical_component(-self.dx, L),
                            _canonical_component(-self.dy, L))

    def is_zero(self) -> bool:
        return self.dx == 0 and self.dy == 0


def site_coords(site: int, L: int) -> tuple[int, int]:
    return site % L, site // L


def coords_site(x: int, y: int, L: int) -> int:
    return (x % L) + L * (y % L)


def min_image_disp(site_i: int, site_j: int, L: int) -> Displacement:
    """Canonical displacement from site_i to site_j on the L x L torus."""
    n = L * L
    if not (0 <= site_i < n and 0 <= site_j < n):
        raise ValueError(f"site index out of range [0, {n}): got {site_i}, {site_j}")
    xi, yi = site_coords(site_i, L)
    xj, yj = site_coords(site_j, L)
    return Displacement(_canonical_component(xj - xi, L),
                        _canonical_component(yj - yi, L))


@lru_cache(maxsize=None)
def squared_distance_grid(L: int) -> np.ndarray:
    """(L, L) grid of minimum-image squared distances, indexed by (dx%L, dy%L)."""
    c = np.arange(L)
    m = np.minimum(c, L - c)
    return (m[:, None] ** 2 + m[None, :] ** 2).astype(np.int64)


@lru_cache(maxsize=None)
def weight_grid(L: int, alpha: float) -> np.ndarray:
    """(L, L) grid of r^(-alpha) over displacements, 0 at the origin.

    alpha = inf keeps only distance-1 entries.  Read-only (cached).
    """
    r2 = squared_distance_grid(L)
    if math.isinf(alpha):
        w = (r2 == 1).astype(np.float64)
    else:
        w = np.zeros((L, L), dtype=np.float64)
        nz = r2 > 0
        w[nz] = np.power(r2[nz].astype(np.float64), -alpha / 2.0)
    w[0, 0] = 0.0
    w.setflags(write=False)
    return w


def kac_norm(L: int, alpha: float) -> float:
    """Kac constant N_alpha = (L^2-1)^(-1) sum_{i<j} r_ij^(-alpha)."""
    if L < 2:
        raise ValueError("L must be at least 2")
    if not (alpha > 0):
        raise ValueError("alpha must be positive (math.inf allowed)")
    n = L * L
    # sum over ordered pairs = L^2 * sum over nonzero displacements
    total = n * float(weight_grid(L, alpha).sum())
    return total / (2.0 * (n - 1))


@dataclass(frozen=True)
class LatticeSpec:
    """Torus geometry: linear size L, power-law exponent alpha, Kac constant."""

    L: int
    alpha: float
    kac: float = field(init=False)

    def __post_init__(self):
        if self.L < 2:
            raise ValueError("L must be at least 2")
        if not (self.alpha > 0):
            raise ValueError("alpha must be positive (math.inf allowed)")
        object.__setattr__(self, "kac", kac_norm(self.L, self.alpha))

    @property
    def n_sites(self) -> int:
        return self.L * self.L

    def distance(self, site_i: int, site_j: int) -> float:
        return min_image_disp(site_i, site_j, self.L).distance

    def pair_weight_matrix(self) -> np.ndarray:
        """(n, n) matrix of r_ij^(-alpha), zero diagonal."""
        L = self.L
        w = weight_grid(L, self.alpha)
        sites = np.arange(self.n_sites)
        x, y = sites % L, sites // L
        dx = (x[None, :] - x[:, None]) % L
        dy = (y[None, :] - y[:, None]) % L
        return w[dx, dy]


def enumerate_displacements(L: int, identify_inversion: bool = False):
    """All L^2 - 1 nonzero canonical displacements, ordered by (r^2, dx, dy).

    Returns a list of (Displacement, multiplicity).  Without identification
    every multiplicity is 1.  With identification one representative per
    {d, -d} orbit is kept and the multiplicity is the orbit size (1 for the
    self-inverse half-period displacements of even L, else 2).
    """
    if L < 2:
        raise ValueError("L must be at least 2")
    disps = []
    for dy in range(L):
        for dx in range(L):
            d = Displacement(_canonical_component(dx, L), _canonical_component(dy, L))
            if not d.is_zero():
                disps.append(d)
    disps.sort(key=lambda d: (d.r2, d.dx, d.dy))
    if not identify_inversion:
        return [(d, 1) for d in disps]
    seen = set()
    orbits = []
    for d in disps:
        if d in seen:
            continue
        neg = d.negate(L)
        seen.add(d)
        if neg == d:
            orbits.append((d, 1))
        else:
            seen.add(neg)
            orbits.append((d, 2))
    return orbits
