import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

import lrising as lr


@pytest.fixture(scope="session")
def pair_solutions():
    """Cached two-magnon solutions on the 101x101 lattice, keyed (alpha, g, mode)."""
    cache = {}

    def get(alpha, g, mode="full"):
        key = (alpha, g, mode)
        if key not in cache:
            lat = lr.LatticeSpec(101, alpha)
            h2 = lr.build_h2(lat, 1.0, g, mode, identify_inversion=True)
            cache[key] = (lat, h2, lr.diagonalize(h2))
        return cache[key]

    return get


@pytest.fixture(scope="session")
def quench_cache():
    """Cached exact quenches at alpha=3, Jt <= 200, keyed (L, g)."""
    cache = {}

    def get(L, g):
        if (L, g) not in cache:
            lat = lr.LatticeSpec(L, 3.0)
            cache[(L, g)] = lr.run_quench(lat, 1.0, g, 200.0, dt_record=0.05)
        return cache[(L, g)]

    return get
