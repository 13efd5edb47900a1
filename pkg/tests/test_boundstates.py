import math

import numpy as np
import pytest

import lrising as lr
from lrising.boundstates import (
    Thresholds,
    classify,
    density_map,
    density_peak_distance,
    ipr,
    mean_separation,
)
from lrising.sw import build_h2, diagonalize, sector_basis


@pytest.fixture(scope="module")
def small_solution():
    lat = lr.LatticeSpec(5, 3.0)
    h2 = build_h2(lat, 1.0, 0.2, "full", identify_inversion=True)
    return lat, h2, diagonalize(h2)


def test_ipr_delta_uniform_two_state():
    assert ipr(np.array([0.0, 1.0, 0.0])) == pytest.approx(1.0)
    n = 64
    assert ipr(np.full(n, 1 / math.sqrt(n))) == pytest.approx(1.0 / n)
    assert ipr(np.array([1, 1]) / math.sqrt(2)) == pytest.approx(0.5)


def test_ipr_rejects_unnormalized():
    with pytest.raises(ValueError):
        ipr(np.array([1.0, 1.0]))


def test_mean_separation_examples():
    basis = sector_basis(lr.LatticeSpec(5, 3.0), 2)
    states = basis.states
    psi = np.zeros(len(states))
    idx = next(i for i, d in enumerate(states) if (d.dx, d.dy) == (1, 2))
    psi[idx] = 1.0
    assert mean_separation(psi, basis) == pytest.approx(math.sqrt(5))
    psi = np.zeros(len(states))
    i10 = next(i for i, d in enumerate(states) if (d.dx, d.dy) == (1, 0))
    i01 = next(i for i, d in enumerate(states) if (d.dx, d.dy) == (0, 1))
    psi[i10] = psi[i01] = 1 / math.sqrt(2)
    assert mean_separation(psi, basis) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        mean_separation(psi[:-1], basis)


def test_mean_separation_uniform_brute_force():
    lat = lr.LatticeSpec(101, 3.0)
    basis = sector_basis(lat, 2)
    m = basis.dim
    psi = np.full(m, 1 / math.sqrt(m))
    brute = np.mean([d.distance for d in basis.states])
    assert mean_separation(psi, basis) == pytest.approx(brute, rel=1e-12)


def test_classify_no_field_all_bound():
    lat = lr.LatticeSpec(5, 3.0)
    h2 = build_h2(lat, 1.0, 0.0, "full", identify_inversion=False)
    sol = diagonalize(h2)
    records = classify(sol, h2.basis)
    assert all(r.label == "bound" for r in records)
    assert all(r.ipr == pytest.approx(1.0) for r in records)


def test_classify_partitions_spectrum(small_solution):
    lat, h2, sol = small_solution
    records = classify(sol, h2.basis)
    assert len(records) == sol.dim
    assert {r.eigen_index for r in records} == set(range(sol.dim))
    assert all(r.label in ("bound", "quasilocalized", "scattering") for r in records)
    m = sum(h2.basis.orbit_sizes)
    for r in records:
        assert 1.0 / m - 1e-12 <= r.ipr <= 1.0 + 1e-12
        assert 1.0 <= r.dbar <= math.sqrt(2) * lat.L / 2 + 1e-12


def test_classify_deterministic(small_solution):
    lat, h2, sol = small_solution
    a = classify(sol, h2.basis)
    b = classify(sol, h2.basis)
    assert a == b


def test_classify_threshold_config(small_solution):
    lat, h2, sol = small_solution
    tight = classify(sol, h2.basis, Thresholds(bound_ipr=0.9))
    loose = classify(sol, h2.basis, Thresholds(bound_ipr=1e-6))
    assert sum(r.label == "bound" for r in tight) <= \
        sum(r.label == "bound" for r in loose)


def test_density_map_delta():
    lat = lr.LatticeSpec(5, 3.0)
    basis = sector_basis(lat, 2)
    psi = np.zeros(basis.dim)
    idx = next(i for i, d in enumerate(basis.states) if (d.dx, d.dy) == (1, 0))
    psi[idx] = 1.0
    grid = density_map(psi, basis, 5)
    assert grid.sum() == pytest.approx(1.0)
    assert np.count_nonzero(grid) == 1
    off = (5 - 1) // 2
    assert grid[1 + off, 0 + off] == pytest.approx(1.0)


def test_density_map_identified_symmetric(small_solution):
    lat, h2, sol = small_solution
    for idx in (0, 3, 7):
        grid = density_map(sol.vectors[:, idx], h2.basis, lat.L)
        assert grid.sum() == pytest.approx(1.0, abs=1e-9)
        # unfolded map is inversion symmetric
        assert np.allclose(grid, grid[::-1, ::-1], atol=1e-12)


def test_density_maps_sum_to_one(small_solution):
    lat, h2, sol = small_solution
    for idx in range(sol.dim):
        grid = density_map(sol.vectors[:, idx], h2.basis, lat.L)
        assert abs(grid.sum() - 1.0) < 1e-9


def test_classification_consistent_across_identification():
    # unfolded measures agree whether or not the basis was identified
    lat = lr.LatticeSpec(7, 3.0)
    su = diagonalize(build_h2(lat, 1.0, 0.2, "full", identify_inversion=False))
    si = diagonalize(build_h2(lat, 1.0, 0.2, "full", identify_inversion=True))
    ru = classify(su)
    ri = classify(si)
    bound_u = sorted(r.energy for r in ru if r.label == "bound")
    bound_i = sorted(r.energy for r in ri if r.label == "bound")
    # identified spectrum is the symmetric half; every identified bound level
    # appears among the unidentified ones
    for e in bound_i:
        assert min(abs(e - x) for x in bound_u) < 1e-9


def test_monotone_suppression_with_field():
    # raising g from 0.2 to 0.5 must not create bound cores on farther rings
    lat = lr.LatticeSpec(31, 2.0)

    def max_bound_core(g):
        h2 = build_h2(lat, 1.0, g, "full", identify_inversion=True)
        sol = diagonalize(h2)
        records = classify(sol, h2.basis)
        cores = [density_peak_distance(sol.vectors[:, r.eigen_index], h2.basis, lat.L)
                 for r in records if r.label == "bound"]
        return max(cores)

    assert max_bound_core(0.5) <= max_bound_core(0.2) + 1e-9
