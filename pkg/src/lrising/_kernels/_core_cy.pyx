# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels for the configuration-basis spin Hamiltonian.

Configurations are bit masks: bit k set means the spin on site k points up.
"""

import numpy as np


def zz_quadratic(int n_sites, double[:, ::1] pair_w):
    """Classical quadratic form Q[s] = sum_{i<j} w_ij sigma_i(s) sigma_j(s).

    sigma = +1 for up, -1 for down.  Runs in O(2^n * n) using a Gray-code
    walk that flips one spin per step and updates the local fields.
    """
    cdef Py_ssize_t dim = 1 << n_sites
    out_arr = np.empty(dim, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef double[::1] h = np.empty(n_sites, dtype=np.float64)
    cdef signed char[::1] sigma = np.empty(n_sites, dtype=np.int8)
    cdef Py_ssize_t i, j, k, gray
    cdef double q = 0.0

    for j in range(n_sites):
        sigma[j] = -1
    # all-down reference: every pair contributes +w_ij
    for i in range(n_sites):
        for j in range(i + 1, n_sites):
            q += pair_w[i, j]
    for j in range(n_sites):
        h[j] = 0.0
        for k in range(n_sites):
            h[j] -= pair_w[j, k]
    out[0] = q

    gray = 0
    for i in range(1, dim):
        # bit flipped between gray(i-1) and gray(i) is the lowest set bit of i
        k = 0
        while not (i >> k) & 1:
            k += 1
        gray ^= 1 << k
        q -= 2.0 * sigma[k] * h[k]
        sigma[k] = -sigma[k]
        for j in range(n_sites):
            h[j] += 2.0 * sigma[k] * pair_w[j, k]
        out[gray] = q

    return out_arr


def apply_flips(double complex[::1] x, int n_sites, double amp,
                double complex[::1] out):
    """out[s] += amp * sum_k x[s ^ (1 << k)] (single-spin-flip off-diagonal)."""
    cdef Py_ssize_t dim = x.shape[0]
    cdef Py_ssize_t k, step, base, t, i0, i1

    for k in range(n_sites):
        step = 1 << k
        base = 0
        while base < dim:
            for t in range(step):
                i0 = base + t
                i1 = i0 + step
                out[i0] = out[i0] + amp * x[i1]
                out[i1] = out[i1] + amp * x[i0]
            base += 2 * step


def matvec(double complex[::1] x, double[::1] diag, int n_sites, double amp,
           double complex[::1] out):
    """out[s] = diag[s] x[s] + amp sum_k x[s ^ (1 << k)], one fused pass."""
    cdef Py_ssize_t dim = x.shape[0]
    cdef Py_ssize_t i, k
    cdef double complex acc

    for i in range(dim):
        acc = diag[i] * x[i]
        for k in range(n_sites):
            acc = acc + amp * x[i ^ (1 << k)]
        out[i] = acc
