"""Independent reference constructions used only by the tests."""

import numpy as np
import scipy.sparse as sp


def kron_hamiltonian(lattice, J, g):
    """Spin Hamiltonian from explicit Kronecker products (site k = bit k)."""
    n = lattice.n_sites
    sz = sp.csr_matrix(np.diag([-0.5, 0.5]))  # basis order (down, up)
    sx = sp.csr_matrix(0.5 * np.array([[0.0, 1.0], [1.0, 0.0]]))
    eye = sp.identity(2, format="csr")

    def site_op(op, k):
        res = sp.identity(1, format="csr")
        for j in range(n):
            res = sp.kron(op if j == k else eye, res, "csr")
        return res

    zs = [site_op(sz, k) for k in range(n)]
    xs = [site_op(sx, k) for k in range(n)]
    w = lattice.pair_weight_matrix()
    H = sp.csr_matrix((2 ** n, 2 ** n))
    for i in range(n):
        for j in range(n):
            if i != j and w[i, j] != 0.0:
                H = H - (J / lattice.kac) * w[i, j] * (zs[i] @ zs[j])
    for k in range(n):
        H = H - g * xs[k]
    return H


def dense_matrix(H):
    """Materialize a FullHamiltonian as a dense array (small systems only)."""
    mat = np.diag(H.diagonal).astype(np.complex128)
    states = np.arange(H.dim)
    if H.g != 0.0:
        for k in range(H.n_sites):
            mat[states, states ^ (1 << k)] += H.flip_amplitude
    return mat


def windowed_dft_direct(times, values, t_min, t_max):
    """Direct-sum windowed transform; mirrors the fast path's conventions."""
    sel = (times >= t_min - 1e-12) & (times <= t_max + 1e-12)
    t = times[sel]
    y = values[sel]
    n = len(t)
    dt = t[1] - t[0]
    w = 0.54 - 0.46 * np.cos(2 * np.pi * np.arange(n) / (n - 1))
    signal = w * (y - y.mean())
    omegas = 2 * np.pi * np.arange(n) / (n * dt)
    F = np.array([np.sum(signal * np.exp(1j * om * t)) for om in omegas])
    return omegas, F
