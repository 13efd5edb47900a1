"""Few-magnon physics of the 2D long-range transverse-field Ising model.

Modules: lattice geometry and Kac normalization (`lattice`), exact
configuration-basis dynamics (`exact`), effective magnon-sector
Hamiltonians (`sw`), two-magnon eigenstate classification (`boundstates`),
windowed Fourier spectroscopy (`spectral`), file formats and run
configuration (`runio`), and the `lrising` command line (`cli`).
"""

import os as _os

# BLAS/OpenMP thread counts must be fixed before the numeric libraries load
_threads = _os.environ.get("LRISING_NUM_THREADS")
if _threads:
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        _os.environ.setdefault(_var, _threads)

__version__ = "0.1.0"

from .lattice import (  # noqa: E402
    Displacement,
    LatticeSpec,
    enumerate_displacements,
    kac_norm,
    min_image_disp,
)
from .exact import (  # noqa: E402
    FullHamiltonian,
    StateVector,
    TimeSeries,
    build_hamiltonian,
    classical_energy,
    exact_eigenpairs,
    propagate,
    run_quench,
)
from .sw import (  # noqa: E402
    EffectiveHamiltonian,
    EigenSolution,
    GapTable,
    SectorBasis,
    SWDegeneracyError,
    build_h1,
    build_h2,
    build_sector_generic,
    diagonalize,
    dispersion,
    e0_effective,
    gap_table,
    pair_hop,
    sector_basis,
    solve_sectors,
    u_potential,
)
from .boundstates import (  # noqa: E402
    BoundStateRecord,
    Thresholds,
    classify,
    density_map,
    ipr,
    mean_separation,
)
from .spectral import (  # noqa: E402
    PeakAssignment,
    Spectrum,
    detect_peaks,
    fft_spectrum,
    hamming_window,
    match_gaps,
)
from .runio import RunConfig  # noqa: E402

__all__ = [
    "__version__",
    "Displacement", "LatticeSpec", "enumerate_displacements", "kac_norm",
    "min_image_disp",
    "FullHamiltonian", "StateVector", "TimeSeries", "build_hamiltonian",
    "classical_energy", "exact_eigenpairs", "propagate", "run_quench",
    "EffectiveHamiltonian", "EigenSolution", "GapTable", "SectorBasis",
    "SWDegeneracyError", "build_h1", "build_h2", "build_sector_generic",
    "diagonalize", "dispersion", "e0_effective", "gap_table", "pair_hop",
    "sector_basis", "solve_sectors", "u_potential",
    "BoundStateRecord", "Thresholds", "classify", "density_map", "ipr",
    "mean_separation",
    "PeakAssignment", "Spectrum", "detect_peaks", "fft_spectrum",
    "hamming_window", "match_gaps",
    "RunConfig",
]
