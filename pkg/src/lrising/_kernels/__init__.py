"""Hot kernels for exact dynamics: compiled extension with NumPy fallback.

``zz_quadratic`` and ``apply_flips`` are bound to the compiled versions when
the extension built, otherwise to the NumPy ones.  ``HAVE_EXTENSION`` tells
which was picked; both implementations stay importable for cross-checks and
benchmarks.
"""

from . import _core_np

try:
    from . import _core_cy

    HAVE_EXTENSION = True
except ImportError:
    _core_cy = None
    HAVE_EXTENSION = False

if HAVE_EXTENSION:
    zz_quadratic = _core_cy.zz_quadratic
    apply_flips = _core_cy.apply_flips
    matvec = _core_cy.matvec
else:
    zz_quadratic = _core_np.zz_quadratic
    apply_flips = _core_np.apply_flips
    matvec = _core_np.matvec

__all__ = ["zz_quadratic", "apply_flips", "matvec", "HAVE_EXTENSION",
           "_core_np", "_core_cy"]
