"""Effective few-magnon Hamiltonians from second-order Schrieffer-Wolff theory.

Everything is expressed in the configuration language of magnons (spin flips)
above the fully polarized background.  Classical sector energies:

    E_nu({i_m}) = E_0 + 2*nu*J*(1 - 1/L^2) - (2J/N_alpha) sum_{k<l} r_{kl}^(-alpha)

with E_0 = -J(L^2-1)/2.  The transverse field couples sectors nu -> nu +/- 1
with amplitude -g/2 per flip; integrating those couplings out to second order
gives, for basis configurations m, n of one sector and virtual states beta,

    H[m,n] = E(m) delta_{mn}
           + (g^2/8) sum_beta (1/(E_m - E_beta) + 1/(E_n - E_beta))

where the sum runs over the virtual states reached by a single flip from both
m and n.  Closed forms for the 0-, 1- and 2-magnon sectors are implemented
directly; `build_sector_generic` evaluates the same expression from explicit
configuration enumeration and serves as the independent cross-check and as
the route to filtered higher sectors.

Modes: "full" keeps every finite-size denominator exactly; "asymptotic" uses
the large-L / large-distance expansions (leading power laws).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations

import numpy as np

from .lattice import (
    Displacement,
    LatticeSpec,
    coords_site,
    enumerate_displacements,
    min_image_disp,
    site_coords,
    weight_grid,
)

__all__ = [
    "SWDegeneracyError",
    "SolverError",
    "SectorBasis",
    "EffectiveHamiltonian",
    "EigenSolution",
    "GapEntry",
    "GapTable",
    "e0_effective",
    "build_h1",
    "dispersion",
    "single_magnon_band",
    "u_potential",
    "pair_hop",
    "h2_constant",
    "build_h2",
    "sector_basis",
    "build_sector_generic",
    "diagonalize",
    "gap_table",
    "solve_sectors",
    "DEFAULT_EPS_SW",
]

DEFAULT_EPS_SW = 1e-8  # degeneracy guard, in units of J
_DEFAULT_MAX_DENSE = 12000
_DEFAULT_MAX_STATES = 50000


class SWDegeneracyError(ArithmeticError):
    """A virtual-state denominator fell below the degeneracy guard."""


class SolverError(RuntimeError):
    """An eigensolver failed to reach its accuracy contract."""


# ---------------------------------------------------------------------------
# shared scalars


def _constants(lattice: LatticeSpec, J: float):
    """(A, B, E0): magnon cost A = 2J(1-1/L^2), coupling scale B = 2J/N_alpha."""
    if J <= 0:
        raise ValueError("J must be positive")
    n = lattice.n_sites
    A = 2.0 * J * (1.0 - 1.0 / n)
    B = 2.0 * J / lattice.kac
    E0 = -J * (n - 1) / 2.0
    return A, B, E0


def _check_denominators(den, eps: float, J: float, what: str):
    m = float(np.min(np.abs(den)))
    if m < eps * J:
        raise SWDegeneracyError(
            f"virtual-state denominator {m:.3e} below guard {eps * J:.3e} in {what}; "
            "the sector is not energetically separated at these parameters"
        )


def _as_disp(d, L: int) -> Displacement:
    if isinstance(d, Displacement):
        return d.canonicalize(L)
    dx, dy = d
    return Displacement(int(dx), int(dy)).canonicalize(L)


# ---------------------------------------------------------------------------
# zero-magnon sector


def e0_effective(lattice: LatticeSpec, J: float, g: float) -> float:
    """Dressed vacuum energy E_0 - (g^2/4) L^2 / (2J(1-1/L^2)), exact in L."""
    A, _, E0 = _constants(lattice, J)
    return E0 - (g * g / 4.0) * lattice.n_sites / A


# ---------------------------------------------------------------------------
# single-magnon sector


def _h1_scalars(lattice: LatticeSpec, J: float, g: float, mode: str,
                eps_sw: float = DEFAULT_EPS_SW):
    """(diag, hop_grid): site-independent diagonal and hopping over displacements."""
    L = lattice.L
    A, B, E0 = _constants(lattice, J)
    X = weight_grid(L, lattice.alpha)
    origin = np.zeros((L, L), dtype=bool)
    origin[0, 0] = True
    if mode == "full":
        den = A - B * X
        _check_denominators(den[~origin], eps_sw, J, "single-magnon hopping")
        g1 = 1.0 / den
        hop = (g * g / 4.0) * (1.0 / A - g1)
        hop[0, 0] = 0.0
        sum_g1 = float(np.sum(g1[~origin]))
        diag = E0 + A + (g * g / 4.0) / A - (g * g / 4.0) * sum_g1
    elif mode == "asymptotic":
        hop = -(g * g / (8.0 * J * lattice.kac)) * X
        diag = E0 + 2.0 * J - g * g * lattice.n_sites / (8.0 * J)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return diag, hop


def build_h1(lattice: LatticeSpec, J: float, g: float, mode: str = "full",
             eps_sw: float = DEFAULT_EPS_SW,
             max_dense_dim: int = _DEFAULT_MAX_DENSE) -> "EffectiveHamiltonian":
    """Translation-invariant single-magnon Hamiltonian over all L^2 positions."""
    L = lattice.L
    n = lattice.n_sites
    if n > max_dense_dim:
        raise MemoryError(
            f"dense single-magnon matrix of dimension {n} exceeds the cap "
            f"{max_dense_dim}; use dispersion()/single_magnon_band() instead"
        )
    diag, hop = _h1_scalars(lattice, J, g, mode, eps_sw)
    sites = np.arange(n)
    x, y = sites % L, sites // L
    dx = (x[None, :] - x[:, None]) % L
    dy = (y[None, :] - y[:, None]) % L
    mat = hop[dx, dy]
    np.fill_diagonal(mat, diag)
    basis = SectorBasis(nu=1, states=[(i,) for i in range(n)],
                        orbit_sizes=[1] * n, reduction="position")
    return EffectiveHamiltonian(basis=basis, matrix=mat, constant=0.0, mode=mode)


def single_magnon_band(lattice: LatticeSpec, J: float, g: float,
                       mode: str = "full",
                       eps_sw: float = DEFAULT_EPS_SW) -> np.ndarray:
    """(L, L) grid of single-magnon energies E_1(k), k_i = 2 pi n_i / L."""
    diag, hop = _h1_scalars(lattice, J, g, mode, eps_sw)
    return diag + np.fft.fft2(hop).real


def dispersion(lattice: LatticeSpec, J: float, g: float, k, mode: str = "full",
               eps_sw: float = DEFAULT_EPS_SW) -> float:
    """Single-magnon excitation energy E_1(k) - E_0 at wavevector k = (kx, ky).

    k components must sit on the 2 pi / L reciprocal grid.
    """
    L = lattice.L
    kx, ky = float(k[0]), float(k[1])
    step = 2.0 * math.pi / L
    for comp in (kx, ky):
        if abs(comp / step - round(comp / step)) > 1e-9:
            raise ValueError(f"wavevector component {comp} is not a multiple of 2*pi/{L}")
    _, _, E0 = _constants(lattice, J)
    diag, hop = _h1_scalars(lattice, J, g, mode, eps_sw)
    comp = np.arange(L)
    comp = np.where(comp <= L // 2, comp, comp - L)
    phase = np.cos(kx * comp[:, None] + ky * comp[None, :])
    return diag - E0 + float(np.sum(hop * phase))


# ---------------------------------------------------------------------------
# two-magnon sector, closed form


def _g1_grid(lattice: LatticeSpec, J: float, eps_sw: float):
    """1/(A - B x_d) over the displacement grid (the origin cell holds 1/A)."""
    A, B, _ = _constants(lattice, J)
    X = weight_grid(lattice.L, lattice.alpha)
    den = A - B * X
    _check_denominators(den, eps_sw, J, "pair-sector denominators")
    return 1.0 / den, X, A, B


@lru_cache(maxsize=8)
def _cross_integral(alpha: float) -> float:
    """Continuum integral of |r|^(-alpha) |r-e|^(-alpha) over the plane.

    Evaluated on a midpoint grid with unit-cell disks (radius 1/2) excised
    around both singular points, plus an analytic large-radius tail.  Feeds
    only the subleading asymptotic-potential correction, so modest accuracy
    suffices.
    """
    if math.isinf(alpha) or alpha <= 2.0:
        return 0.0
    h = 0.02
    span = 8.0
    ax = np.arange(-span, span + 1.0, h) + h / 2.0
    ay = np.arange(-span, span, h) + h / 2.0
    gx, gy = np.meshgrid(ax, ay, indexing="ij")
    r1 = np.hypot(gx, gy)
    r2 = np.hypot(gx - 1.0, gy)
    mask = (r1 >= 0.5) & (r2 >= 0.5) & (np.maximum(r1, r2) <= span)
    val = float(np.sum((r1[mask] ** -alpha) * (r2[mask] ** -alpha))) * h * h
    # beyond `span` the two factors are both ~ r^(-alpha)
    tail = 2.0 * math.pi * span ** (2.0 - 2.0 * alpha) / (2.0 * alpha - 2.0)
    return val + tail


def h2_constant(lattice: LatticeSpec, J: float, g: float, mode: str = "full",
                eps_sw: float = DEFAULT_EPS_SW) -> float:
    """Two-magnon sector offset: energy of two infinitely separated dressed magnons."""
    A, B, E0 = _constants(lattice, J)
    n = lattice.n_sites
    if mode == "asymptotic":
        return E0 + 4.0 * J - g * g * n / (8.0 * J)
    if mode != "full":
        raise ValueError(f"unknown mode {mode!r}")
    g1, _, _, _ = _g1_grid(lattice, J, eps_sw)
    sum_g1 = float(np.sum(g1)) - 1.0 / A  # exclude the origin cell
    return (E0 + 2.0 * A + g * g / A
            - (g * g / 2.0) * sum_g1
            + (g * g / 4.0) * (n - 2) / A)


def u_potential(d, lattice: LatticeSpec, J: float, g: float, mode: str = "full",
                eps_sw: float = DEFAULT_EPS_SW) -> float:
    """Pair potential U(d): the d-dependent diagonal of the two-magnon sector.

    The sector constant from h2_constant() is excluded, so U -> 0 at large
    separation and U < 0 signals attraction.
    """
    L = lattice.L
    dd = _as_disp(d, L)
    if dd.is_zero():
        raise ValueError("pair separation d must be nonzero")
    A, B, E0 = _constants(lattice, J)
    X = weight_grid(L, lattice.alpha)
    xd = X[dd.dx % L, dd.dy % L]
    if mode == "asymptotic":
        u = -(2.0 * J - g * g / (2.0 * J)) * xd / lattice.kac
        if not math.isinf(lattice.alpha) and lattice.alpha > 2.0:
            F = _cross_integral(lattice.alpha)
            u -= (g * g * F / (8.0 * J * lattice.kac ** 2)) * dd.r2 ** -(lattice.alpha - 1.0)
        return u
    if mode != "full":
        raise ValueError(f"unknown mode {mode!r}")
    g1, X, A, B = _g1_grid(lattice, J, eps_sw)
    rolled = np.roll(np.roll(X, dd.dx, axis=0), dd.dy, axis=1)
    den = A - B * (X + rolled)
    _check_denominators(den, eps_sw, J, f"U({dd.dx},{dd.dy}) three-magnon denominators")
    s_d = float(np.sum(1.0 / den)) - 2.0 / (A - B * xd)
    sum_g1 = float(np.sum(g1)) - 1.0 / A
    g1_d = 1.0 / (A - B * xd)
    n = lattice.n_sites
    return (-B * xd
            + g * g * (g1_d - 1.0 / A)
            - (g * g / 4.0) * (s_d - 2.0 * sum_g1 + 2.0 * g1_d + (n - 2) / A))


def pair_hop(d, d_prime, lattice: LatticeSpec, J: float, g: float,
             mode: str = "full", eps_sw: float = DEFAULT_EPS_SW) -> float:
    """Correlated pair-hopping amplitude t(d, d') between separations d and d'."""
    L = lattice.L
    da, db = _as_disp(d, L), _as_disp(d_prime, L)
    if da.is_zero() or db.is_zero():
        raise ValueError("separations must be nonzero")
    if da == db:
        raise ValueError("pair_hop requires d != d'")
    A, B, _ = _constants(lattice, J)
    X = weight_grid(L, lattice.alpha)
    xd = X[da.dx % L, da.dy % L]
    xp = X[db.dx % L, db.dy % L]
    xrel = X[(da.dx - db.dx) % L, (da.dy - db.dy) % L]
    if mode == "asymptotic":
        return -(g * g / (8.0 * J * lattice.kac)) * xrel
    if mode != "full":
        raise ValueError(f"unknown mode {mode!r}")
    den = np.array([A - B * xd, A - B * xp,
                    A - B * (xp + xrel), A - B * (xd + xrel)])
    _check_denominators(den, eps_sw, J, f"t({da.dx},{da.dy} -> {db.dx},{db.dy})")
    return (g * g / 8.0) * (1.0 / den[0] + 1.0 / den[1] - 1.0 / den[2] - 1.0 / den[3])


def _h2_diag_all(lattice: LatticeSpec, J: float, g: float, mode: str,
                 eps_sw: float, disp_idx: np.ndarray) -> np.ndarray:
    """Vectorized U(d) for the listed displacement grid indices (a, b)."""
    L = lattice.L
    A, B, _ = _constants(lattice, J)
    X = weight_grid(L, lattice.alpha)
    a, b = disp_idx[:, 0], disp_idx[:, 1]
    xd = X[a, b]
    if mode == "asymptotic":
        u = -(2.0 * J - g * g / (2.0 * J)) * xd / lattice.kac
        if not math.isinf(lattice.alpha) and lattice.alpha > 2.0:
            F = _cross_integral(lattice.alpha)
            r2 = np.asarray(
                [Displacement(int(aa), int(bb)).canonicalize(L).r2 for aa, bb in disp_idx],
                dtype=np.float64)
            u = u - (g * g * F / (8.0 * J * lattice.kac ** 2)) * r2 ** -(lattice.alpha - 1.0)
        return u
    g1, X, A, B = _g1_grid(lattice, J, eps_sw)
    sum_g1 = float(np.sum(g1)) - 1.0 / A
    n = lattice.n_sites
    g1_d = 1.0 / (A - B * xd)
    out = np.empty(len(disp_idx))
    for i, (aa, bb) in enumerate(disp_idx):
        rolled = np.roll(np.roll(X, aa, axis=0), bb, axis=1)
        den = A - B * (X + rolled)
        _check_denominators(den, eps_sw, J, f"U(grid {aa},{bb})")
        s_d = float(np.sum(1.0 / den)) - 2.0 * g1_d[i]
        out[i] = (-B * xd[i]
                  + g * g * (g1_d[i] - 1.0 / A)
                  - (g * g / 4.0) * (s_d - 2.0 * sum_g1 + 2.0 * g1_d[i] + (n - 2) / A))
    return out


def _h2_hop_block(lattice: LatticeSpec, J: float, g: float, mode: str,
                  eps_sw: float, rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
    """Hopping block t(row_d, col_d) for grid-index arrays rows (R,2), cols (C,2)."""
    L = lattice.L
    A, B, _ = _constants(lattice, J)
    X = weight_grid(L, lattice.alpha)
    ra, rb = rows[:, 0][:, None], rows[:, 1][:, None]
    ca, cb = cols[:, 0][None, :], cols[:, 1][None, :]
    xrel = X[(ra - ca) % L, (rb - cb) % L]
    if mode == "asymptotic":
        return -(g * g / (8.0 * J * lattice.kac)) * xrel
    xd = X[rows[:, 0], rows[:, 1]][:, None]
    xp = X[cols[:, 0], cols[:, 1]][None, :]
    den3a = A - B * (xp + xrel)
    den3b = A - B * (xd + xrel)
    same = ((ra - ca) % L == 0) & ((rb - cb) % L == 0)
    _check_denominators(den3a[~same], eps_sw, J, "pair-hop block")
    _check_denominators(den3b[~same], eps_sw, J, "pair-hop block")
    block = (g * g / 8.0) * (1.0 / (A - B * xd) + 1.0 / (A - B * xp)
                             - 1.0 / den3a - 1.0 / den3b)
    return np.where(same, 0.0, block)


def build_h2(lattice: LatticeSpec, J: float, g: float, mode: str = "full",
             identify_inversion: bool = True, eps_sw: float = DEFAULT_EPS_SW,
             max_dense_dim: int = _DEFAULT_MAX_DENSE) -> "EffectiveHamiltonian":
    """Two-magnon sector Hamiltonian over relative separations.

    Basis states are the nonzero canonical displacements; with inversion
    identification one representative per {d, -d} orbit is kept and matrix
    elements accumulate orbit multiplicities, so the identified matrix is
    isospectral to the inversion-symmetric subspace of the unidentified one.
    The matrix holds U(d) and t(d, d'); the sector offset from h2_constant()
    is stored separately in `constant`.
    """
    if mode not in ("full", "asymptotic"):
        raise ValueError(f"unknown mode {mode!r}")
    L = lattice.L
    orbits = enumerate_displacements(L, identify_inversion)
    reps = [d for d, _ in orbits]
    sizes = np.array([s for _, s in orbits], dtype=np.int64)
    dim = len(reps)
    if dim > max_dense_dim:
        raise MemoryError(f"two-magnon basis of size {dim} exceeds cap {max_dense_dim}")

    rep_idx = np.array([(d.dx % L, d.dy % L) for d in reps], dtype=np.int64)
    diag = _h2_diag_all(lattice, J, g, mode, eps_sw, rep_idx)
    const = h2_constant(lattice, J, g, mode, eps_sw)

    if not identify_inversion:
        mat = np.empty((dim, dim))
        chunk = max(1, (1 << 22) // max(dim, 1))
        for lo in range(0, dim, chunk):
            hi = min(dim, lo + chunk)
            mat[lo:hi] = _h2_hop_block(lattice, J, g, mode, eps_sw,
                                       rep_idx[lo:hi], rep_idx)
        mat[np.arange(dim), np.arange(dim)] = diag
    else:
        # column-orbit accumulation: M[o', o] = sqrt(|o'|/|o|) * (H[rep', rep_o]
        # + H[rep', -rep_o] for size-2 orbits).  -rep_o is never itself a
        # canonical representative when the orbit has size 2, so only the
        # rep-rep diagonal needs the U(d) substitution.
        neg_idx = np.array([((-d.dx) % L, (-d.dy) % L) for d in reps], dtype=np.int64)
        mat = np.empty((dim, dim))
        chunk = max(1, (1 << 22) // max(dim, 1))
        for lo in range(0, dim, chunk):
            hi = min(dim, lo + chunk)
            rows = rep_idx[lo:hi]
            h_rep = _h2_hop_block(lattice, J, g, mode, eps_sw, rows, rep_idx)
            h_rep[np.arange(hi - lo), np.arange(lo, hi)] = diag[lo:hi]
            h_neg = _h2_hop_block(lattice, J, g, mode, eps_sw, rows, neg_idx)
            block = h_rep + np.where((sizes == 2)[None, :], h_neg, 0.0)
            block *= np.sqrt(sizes[lo:hi, None] / sizes[None, :].astype(np.float64))
            mat[lo:hi] = block

    basis = SectorBasis(nu=2, states=reps, orbit_sizes=list(sizes),
                        reduction="pinned_displacement",
                        identified=identify_inversion)
    return EffectiveHamiltonian(basis=basis, matrix=mat, constant=const, mode=mode)


# ---------------------------------------------------------------------------
# generic sector builder (independent route; arbitrary restricted sectors)


@dataclass
class SectorBasis:
    """Enumerated configurations of one magnon sector, zero total momentum.

    `reduction` records how translations were handled:
      - "position": raw site configurations (nu <= 1)
      - "pinned_displacement": one magnon pinned at the origin, states labeled
        by the relative separation (nu = 2)
      - "translation_orbits": one canonical representative per translation
        orbit, matrix elements orbit-accumulated (nu >= 3)
    """

    nu: int
    states: list
    orbit_sizes: list
    reduction: str
    momentum: int = 0
    filter: str | None = None
    identified: bool = False

    def __post_init__(self):
        if len(set(map(self._key, self.states))) != len(self.states):
            raise ValueError("duplicate states after canonicalization")

    @staticmethod
    def _key(s):
        return s if not isinstance(s, Displacement) else (s.dx, s.dy)

    @property
    def dim(self) -> int:
        return len(self.states)


def _canonical_orbit(config: tuple, L: int):
    """Canonical representative and orbit size of a site tuple under translation."""
    n = L * L
    best = None
    translates = set()
    for tx in range(L):
        for ty in range(L):
            moved = tuple(sorted(coords_site(x + tx, y + ty, L)
                                 for x, y in (site_coords(s, L) for s in config)))
            translates.add(moved)
            if best is None or moved < best:
                best = moved
    return best, len(translates)


def _has_nn_pair(config: tuple, L: int) -> bool:
    return any(min_image_disp(a, b, L).r2 == 1 for a, b in combinations(config, 2))


def sector_basis(lattice: LatticeSpec, nu: int, require_nn_pair: bool = False,
                 max_states: int = _DEFAULT_MAX_STATES) -> SectorBasis:
    """Basis of the nu-magnon sector in the reduction used by the builder."""
    L = lattice.L
    n = lattice.n_sites
    if nu < 0:
        raise ValueError("nu must be non-negative")
    if nu == 0:
        return SectorBasis(nu=0, states=[()], orbit_sizes=[1], reduction="position")
    if nu == 1:
        return SectorBasis(nu=1, states=[(i,) for i in range(n)],
                           orbit_sizes=[1] * n, reduction="position")
    if nu == 2:
        orbits = enumerate_displacements(L, identify_inversion=False)
        return SectorBasis(nu=2, states=[d for d, _ in orbits],
                           orbit_sizes=[1] * len(orbits),
                           reduction="pinned_displacement")
    reps = {}
    for config in combinations(range(n), nu):
        if require_nn_pair and not _has_nn_pair(config, L):
            continue
        rep, size = _canonical_orbit(config, L)
        reps.setdefault(rep, size)
        if len(reps) > max_states:
            raise MemoryError(f"sector basis exceeds the {max_states}-state cap")
    states = sorted(reps)
    return SectorBasis(nu=nu, states=states, orbit_sizes=[reps[s] for s in states],
                       reduction="translation_orbits",
                       filter=">=1 nearest-neighbor pair" if require_nn_pair else None)


def _classical_energy_sites(config, lattice: LatticeSpec, J: float,
                            A: float, B: float, E0: float) -> float:
    L = lattice.L
    X = weight_grid(L, lattice.alpha)
    e = E0 + len(config) * A
    for a, b in combinations(config, 2):
        d = min_image_disp(a, b, L)
        e -= B * X[d.dx % L, d.dy % L]
    return e


def _pair_element(m: frozenset, n: frozenset, e_m: float, e_n: float,
                  lattice: LatticeSpec, J: float, g: float, A: float, B: float,
                  E0: float, eps_sw: float) -> float:
    """Off-diagonal element between same-sector configurations m != n."""
    inter = m & n
    if len(inter) != len(m) - 1:
        return 0.0
    union = m | n
    e_lo = _classical_energy_sites(tuple(inter), lattice, J, A, B, E0)
    e_hi = _classical_energy_sites(tuple(union), lattice, J, A, B, E0)
    den = np.array([e_m - e_lo, e_n - e_lo, e_m - e_hi, e_n - e_hi])
    _check_denominators(den, eps_sw, J, f"element {sorted(m)} <-> {sorted(n)}")
    return (g * g / 8.0) * float(np.sum(1.0 / den))


def _diag_element(m: frozenset, e_m: float, lattice: LatticeSpec, J: float,
                  g: float, A: float, B: float, E0: float, eps_sw: float) -> float:
    n_sites = lattice.n_sites
    total = 0.0
    for a in m:
        e_b = _classical_energy_sites(tuple(m - {a}), lattice, J, A, B, E0)
        den = e_m - e_b
        _check_denominators(np.array([den]), eps_sw, J, f"diagonal {sorted(m)}")
        total += 1.0 / den
    for b in range(n_sites):
        if b in m:
            continue
        e_b = _classical_energy_sites(tuple(m | {b}), lattice, J, A, B, E0)
        den = e_m - e_b
        _check_denominators(np.array([den]), eps_sw, J, f"diagonal {sorted(m)}")
        total += 1.0 / den
    return e_m + (g * g / 4.0) * total


def _disp_to_config(d: Displacement, L: int) -> frozenset:
    return frozenset({0, coords_site(d.dx, d.dy, L)})


def build_sector_generic(basis: SectorBasis, lattice: LatticeSpec, J: float,
                         g: float, eps_sw: float = DEFAULT_EPS_SW) -> "EffectiveHamiltonian":
    """Second-order sector Hamiltonian from explicit configuration enumeration.

    Virtual states run over the full (unfiltered) adjacent sectors.  The
    matrix is absolute (classical energies on the diagonal), `constant` = 0.
    """
    L = lattice.L
    A, B, E0 = _constants(lattice, J)

    if basis.reduction == "position":
        configs = [frozenset(s) for s in basis.states]
    elif basis.reduction == "pinned_displacement":
        configs = [_disp_to_config(d, L) for d in basis.states]
    elif basis.reduction == "translation_orbits":
        configs = [frozenset(s) for s in basis.states]
    else:
        raise ValueError(f"unknown reduction {basis.reduction!r}")

    energies = [_classical_energy_sites(tuple(c), lattice, J, A, B, E0)
                for c in configs]
    dim = len(configs)
    mat = np.zeros((dim, dim))

    if basis.reduction in ("position", "pinned_displacement"):
        for i in range(dim):
            mat[i, i] = _diag_element(configs[i], energies[i], lattice, J, g,
                                      A, B, E0, eps_sw)
            for j in range(i + 1, dim):
                v = _pair_element(configs[i], configs[j], energies[i], energies[j],
                                  lattice, J, g, A, B, E0, eps_sw)
                mat[i, j] = v
                mat[j, i] = v
    else:
        index = {tuple(sorted(c)): i for i, c in enumerate(configs)}
        sizes = np.asarray(basis.orbit_sizes, dtype=np.float64)
        n_sites = lattice.n_sites
        for j, cj in enumerate(configs):
            mat[j, j] += _diag_element(cj, energies[j], lattice, J, g,
                                       A, B, E0, eps_sw)
            seen_moves = set()
            for a in cj:
                for b in range(n_sites):
                    if b in cj:
                        continue
                    moved = (cj - {a}) | {b}
                    key = tuple(sorted(moved))
                    if key in seen_moves:
                        continue
                    seen_moves.add(key)
                    rep, _ = _canonical_orbit(key, L)
                    i = index.get(rep)
                    if i is None:
                        continue  # outside the (possibly filtered) basis
                    e_moved = _classical_energy_sites(key, lattice, J, A, B, E0)
                    v = _pair_element(frozenset(key), cj, e_moved, energies[j],
                                      lattice, J, g, A, B, E0, eps_sw)
                    mat[i, j] += v * math.sqrt(sizes[i] / sizes[j])
        mat = 0.5 * (mat + mat.T)

    return EffectiveHamiltonian(basis=basis, matrix=mat, constant=0.0,
                                mode="generic_sw")


# ---------------------------------------------------------------------------
# diagonalization, gap tables


@dataclass
class EffectiveHamiltonian:
    """Dense symmetric sector Hamiltonian; energies = constant + eigenvalues."""

    basis: SectorBasis
    matrix: np.ndarray
    constant: float
    mode: str

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def symmetry_defect(self) -> float:
        return float(np.max(np.abs(self.matrix - self.matrix.T))) if self.dim else 0.0

    def absolute_matrix(self) -> np.ndarray:
        return self.matrix + self.constant * np.eye(self.dim)


@dataclass
class EigenSolution:
    """Eigenpairs of one sector, ascending; energies are absolute."""

    energies: np.ndarray
    vectors: np.ndarray | None
    basis: SectorBasis | None
    nu: int | None
    provenance: str

    @property
    def dim(self) -> int:
        return len(self.energies)


def diagonalize(H: EffectiveHamiltonian, check_subset: int = 64,
                seed: int = 0) -> EigenSolution:
    """All eigenpairs of a sector Hamiltonian with accuracy verification.

    Diagonal matrices short-circuit to coordinate-delta eigenvectors so that
    degenerate diagonal entries are never mixed.  For large matrices the
    orthonormality/residual checks run on a seeded random column subset.
    """
    mat = H.matrix
    dim = H.dim
    defect = H.symmetry_defect()
    scale = max(float(np.max(np.abs(mat))), 1.0) if dim else 1.0
    if defect > 1e-12 * scale:
        raise SolverError(f"matrix not symmetric: defect {defect:.3e}")
    off = mat - np.diag(np.diag(mat))
    if not np.any(off):
        order = np.argsort(np.diag(mat), kind="stable")
        vecs = np.eye(dim)[:, order]
        return EigenSolution(energies=np.diag(mat)[order] + H.constant,
                             vectors=vecs, basis=H.basis, nu=H.basis.nu,
                             provenance=H.mode)
    w, v = np.linalg.eigh(mat)
    hnorm = max(float(np.max(np.abs(w))), 1e-300)
    if dim <= 1200:
        cols = np.arange(dim)
    else:
        rng = np.random.default_rng(seed)
        cols = rng.choice(dim, size=min(check_subset, dim), replace=False)
    sub = v[:, cols]
    ortho = float(np.max(np.abs(sub.T @ sub - np.eye(len(cols)))))
    if ortho > 1e-10:
        raise SolverError(f"eigenvector orthonormality defect {ortho:.3e}")
    res = float(np.max(np.linalg.norm(mat @ sub - sub * w[cols], axis=0)))
    if res > 1e-9 * hnorm:
        raise SolverError(f"eigenpair residual {res:.3e} exceeds 1e-9*|H|")
    return EigenSolution(energies=w + H.constant, vectors=v, basis=H.basis,
                         nu=H.basis.nu, provenance=H.mode)


@dataclass(frozen=True)
class GapEntry:
    nu: int
    nu_prime: int
    i: int
    j: int
    delta: float


@dataclass
class GapTable:
    entries: list
    provenance: dict

    def deltas(self) -> np.ndarray:
        return np.array([e.delta for e in self.entries])

    def lookup(self, nu: int, nu_prime: int, i: int, j: int) -> float:
        for e in self.entries:
            if (e.nu, e.nu_prime, e.i, e.j) == (nu, nu_prime, i, j):
                return e.delta
        raise KeyError(f"no gap entry ({nu},{nu_prime},{i},{j})")


def gap_table(solutions: dict, max_levels: int = 6) -> GapTable:
    """All |E_i^nu - E_j^nu'| between the lowest `max_levels` levels per sector.

    `solutions` maps nu -> EigenSolution.  Entries are sorted ascending in
    the gap; level indices are 1-based.
    """
    nus = sorted(solutions)
    if len(nus) < 2:
        raise ValueError("need at least two sectors")
    entries = []
    for a_pos, nu in enumerate(nus):
        for nu_p in nus[a_pos + 1:]:
            ea = solutions[nu].energies[:max_levels]
            eb = solutions[nu_p].energies[:max_levels]
            for i, ei in enumerate(ea, start=1):
                for j, ej in enumerate(eb, start=1):
                    entries.append(GapEntry(nu, nu_p, i, j, abs(float(ei - ej))))
    entries.sort(key=lambda e: (e.delta, e.nu, e.nu_prime, e.i, e.j))
    return GapTable(entries=entries,
                    provenance={nu: solutions[nu].provenance for nu in nus})


def solve_sectors(lattice: LatticeSpec, J: float, g: float, nus,
                  mode: str = "full", identify_inversion: bool = True,
                  eps_sw: float = DEFAULT_EPS_SW) -> dict:
    """Eigen-solve the requested sectors; nu >= 3 uses the filtered band of
    configurations with at least one nearest-neighbor magnon pair."""
    out = {}
    for nu in sorted(set(nus)):
        if nu == 0:
            out[nu] = EigenSolution(
                energies=np.array([e0_effective(lattice, J, g)]), vectors=None,
                basis=None, nu=0, provenance=mode)
        elif nu == 1:
            band = np.sort(single_magnon_band(lattice, J, g, mode, eps_sw).ravel())
            out[nu] = EigenSolution(energies=band, vectors=None, basis=None,
                                    nu=1, provenance=f"{mode}/band")
        elif nu == 2:
            out[nu] = diagonalize(build_h2(lattice, J, g, mode,
                                           identify_inversion, eps_sw))
        else:
            basis = sector_basis(lattice, nu, require_nn_pair=True)
            out[nu] = diagonalize(build_sector_generic(basis, lattice, J, g, eps_sw))
    return out
