"""Classification of two-magnon eigenstates: IPR, mean pair separation, maps.

Measures are taken in the physical relative-separation space.  For an
inversion-identified basis the amplitude weight of an orbit representative
is unfolded evenly onto d and -d first, so classification does not depend on
whether the identification was applied.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lattice import Displacement
from .sw import EigenSolution, SectorBasis

__all__ = [
    "BoundStateRecord",
    "Thresholds",
    "ipr",
    "mean_separation",
    "classify",
    "density_map",
    "density_peak_distance",
    "unfolded_weights",
]


@dataclass(frozen=True)
class Thresholds:
    """Classification cuts; the scattering cut is scattering_factor / M with
    M the number of distinct separations (L^2 - 1)."""

    bound_ipr: float = 0.1
    scattering_factor: float = 5.0


@dataclass(frozen=True)
class BoundStateRecord:
    eigen_index: int
    energy: float
    ipr: float
    dbar: float
    label: str  # "bound" | "quasilocalized" | "scattering"


def ipr(psi: np.ndarray) -> float:
    """Inverse participation ratio sum_d |psi_d|^4 of a normalized vector."""
    p = np.abs(np.asarray(psi)) ** 2
    total = float(p.sum())
    if abs(total - 1.0) > 1e-9:
        raise ValueError(f"input not normalized: sum |psi|^2 = {total:.12f}")
    return float(np.sum(p * p))


def _basis_weights(psi: np.ndarray, basis: SectorBasis):
    """(weights per basis state, orbit sizes array)."""
    p = np.abs(np.asarray(psi)) ** 2
    if len(p) != basis.dim:
        raise ValueError(f"state length {len(p)} does not match basis size {basis.dim}")
    sizes = np.asarray(basis.orbit_sizes, dtype=np.float64)
    return p, sizes


def unfolded_weights(psi: np.ndarray, basis: SectorBasis) -> float:
    """IPR over distinct separations after unfolding orbit weights."""
    p, sizes = _basis_weights(psi, basis)
    # weight p_o spread over |o| members contributes |o| * (p_o/|o|)^2 to sum|psi|^4
    return float(np.sum(p * p / sizes))


def mean_separation(psi: np.ndarray, basis: SectorBasis) -> float:
    """Probability-weighted mean separation sum_d |psi_d|^2 |d|."""
    p, _ = _basis_weights(psi, basis)
    dist = np.array([s.distance for s in basis.states])
    return float(p @ dist)


def classify(solution: EigenSolution, basis: SectorBasis | None = None,
             thresholds: Thresholds = Thresholds()) -> list:
    """Label every eigenstate bound / quasilocalized / scattering.

    Labels partition the spectrum: bound if the unfolded IPR is at least
    `bound_ipr`, scattering if it is at most scattering_factor / M, and
    quasilocalized in between.
    """
    if basis is None:
        basis = solution.basis
    if solution.vectors is None:
        raise ValueError("classification needs eigenvectors")
    sizes = np.asarray(basis.orbit_sizes, dtype=np.float64)
    n_separations = int(np.sum(sizes))
    scattering_cut = thresholds.scattering_factor / n_separations
    records = []
    for idx in range(solution.dim):
        psi = solution.vectors[:, idx]
        value = unfolded_weights(psi, basis)
        dbar = mean_separation(psi, basis)
        if value >= thresholds.bound_ipr:
            label = "bound"
        elif value <= scattering_cut:
            label = "scattering"
        else:
            label = "quasilocalized"
        records.append(BoundStateRecord(eigen_index=idx,
                                        energy=float(solution.energies[idx]),
                                        ipr=value, dbar=dbar, label=label))
    return records


def density_map(psi: np.ndarray, basis: SectorBasis, L: int) -> np.ndarray:
    """|psi(d)|^2 on the (dx, dy) grid, orbit weights unfolded onto d and -d.

    Grid index = component + (L-1)//2, so the origin sits at ((L-1)//2,
    (L-1)//2); the map sums to 1.
    """
    p, sizes = _basis_weights(psi, basis)
    grid = np.zeros((L, L))
    off = (L - 1) // 2
    for w, size, d in zip(p, sizes, basis.states):
        share = w / size
        grid[d.dx + off, d.dy + off] += share
        if size == 2:
            neg = d.negate(L)
            grid[neg.dx + off, neg.dy + off] += share
    return grid


def density_peak_distance(psi: np.ndarray, basis: SectorBasis, L: int) -> float:
    """Separation |d| at the maximum of the unfolded probability density."""
    grid = density_map(psi, basis, L)
    off = (L - 1) // 2
    idx = np.unravel_index(int(np.argmax(grid)), grid.shape)
    return float(Displacement(idx[0] - off, idx[1] - off).distance)
