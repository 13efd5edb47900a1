import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lrising.lattice import (
    Displacement,
    LatticeSpec,
    enumerate_displacements,
    kac_norm,
    min_image_disp,
)


def site(x, y, L):
    return (x % L) + L * (y % L)


def test_min_image_examples():
    assert min_image_disp(site(0, 0, 4), site(1, 0, 4), 4) == Displacement(1, 0)
    assert min_image_disp(site(0, 0, 4), site(3, 0, 4), 4) == Displacement(-1, 0)
    # half period resolves to +L/2
    d = min_image_disp(site(0, 0, 4), site(2, 2, 4), 4)
    assert d == Displacement(2, 2)
    assert d.distance == pytest.approx(2 * math.sqrt(2))


def test_min_image_rejects_bad_site():
    with pytest.raises(ValueError):
        min_image_disp(0, 16, 4)
    with pytest.raises(ValueError):
        min_image_disp(-1, 0, 4)


def test_kac_hand_enumeration():
    assert kac_norm(2, 2.0) == pytest.approx(5.0 / 3.0, rel=1e-15)
    assert kac_norm(3, 2.0) == pytest.approx(27.0 / 8.0, rel=1e-15)


@pytest.mark.parametrize("L", [3, 4, 5, 8, 11])
def test_kac_nearest_neighbor_limit(L):
    # only distance-1 pairs survive: 2 L^2 of them for L >= 3
    assert kac_norm(L, math.inf) == pytest.approx(2 * L * L / (L * L - 1), rel=1e-15)


@pytest.mark.parametrize("L", [2, 3, 5, 10, 31])
def test_kac_nn_large_L_limit(L):
    assert abs(kac_norm(L, math.inf) - 2.0) <= 2.0 / (L * L - 1) + 1e-12


@pytest.mark.parametrize("L", [3, 4, 7])
def test_kac_monotone_in_alpha(L):
    alphas = [1.5, 2.0, 3.0, 4.0, 6.0, 10.0]
    vals = [kac_norm(L, a) for a in alphas]
    assert all(a > b for a, b in zip(vals, vals[1:]))


def test_lattice_spec_invariants():
    lat = LatticeSpec(4, 3.0)
    assert lat.n_sites == 16
    assert lat.kac == pytest.approx(kac_norm(4, 3.0), rel=1e-12)
    with pytest.raises(ValueError):
        LatticeSpec(1, 3.0)
    with pytest.raises(ValueError):
        LatticeSpec(4, -1.0)


@given(L=st.integers(2, 9), xi=st.integers(0, 80), yi=st.integers(0, 80),
       xj=st.integers(0, 80), yj=st.integers(0, 80))
@settings(max_examples=200, deadline=None)
def test_distance_symmetry(L, xi, yi, xj, yj):
    i, j = site(xi, yi, L), site(xj, yj, L)
    dij = min_image_disp(i, j, L)
    dji = min_image_disp(j, i, L)
    assert dij.r2 == dji.r2


@given(L=st.integers(2, 9), xi=st.integers(0, 80), yi=st.integers(0, 80),
       xj=st.integers(0, 80), yj=st.integers(0, 80),
       tx=st.integers(0, 8), ty=st.integers(0, 8))
@settings(max_examples=200, deadline=None)
def test_translation_invariance(L, xi, yi, xj, yj, tx, ty):
    i, j = site(xi, yi, L), site(xj, yj, L)
    it, jt = site(xi + tx, yi + ty, L), site(xj + tx, yj + ty, L)
    assert min_image_disp(i, j, L) == min_image_disp(it, jt, L)


@given(L=st.integers(2, 9), dx=st.integers(-20, 20), dy=st.integers(-20, 20))
@settings(max_examples=200, deadline=None)
def test_canonicalization_idempotent(L, dx, dy):
    once = Displacement(dx, dy).canonicalize(L)
    assert once.canonicalize(L) == once
    assert -L / 2 < once.dx <= L / 2
    assert -L / 2 < once.dy <= L / 2


@given(L=st.integers(2, 9), xi=st.integers(0, 80), yi=st.integers(0, 80),
       xj=st.integers(0, 80), yj=st.integers(0, 80))
@settings(max_examples=200, deadline=None)
def test_min_image_distance_is_minimal(L, xi, yi, xj, yj):
    i, j = site(xi, yi, L), site(xj, yj, L)
    d = min_image_disp(i, j, L)
    raw_dx, raw_dy = (xj - xi) % L, (yj - yi) % L
    best = min((raw_dx + sx * L) ** 2 + (raw_dy + sy * L) ** 2
               for sx in (-1, 0, 1) for sy in (-1, 0, 1))
    assert d.r2 == best


def test_enumerate_counts():
    assert len(enumerate_displacements(2)) == 3
    assert len(enumerate_displacements(3)) == 8
    assert len(enumerate_displacements(3, identify_inversion=True)) == 4
    # L=2: every displacement is self-inverse
    orbits = enumerate_displacements(2, identify_inversion=True)
    assert len(orbits) == 3
    assert all(size == 1 for _, size in orbits)


@pytest.mark.parametrize("L", [3, 4, 5, 6])
def test_enumerate_orbit_sizes(L):
    full = enumerate_displacements(L)
    assert len(full) == L * L - 1
    orbits = enumerate_displacements(L, identify_inversion=True)
    assert sum(size for _, size in orbits) == L * L - 1
    for rep, size in orbits:
        assert size == (1 if rep.negate(L) == rep else 2)
    # ordering is deterministic: by (r^2, dx, dy)
    keys = [(d.r2, d.dx, d.dy) for d, _ in full]
    assert keys == sorted(keys)


def test_pair_weight_matrix():
    lat = LatticeSpec(3, 2.0)
    w = lat.pair_weight_matrix()
    assert w.shape == (9, 9)
    assert np.allclose(w, w.T)
    assert np.all(np.diag(w) == 0)
    assert w[0, 1] == pytest.approx(1.0)
    assert w[0, site(1, 1, 3)] == pytest.approx(0.5)
