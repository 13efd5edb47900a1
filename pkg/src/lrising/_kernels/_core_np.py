"""Pure NumPy implementations of the configuration-basis kernels.

Used when the compiled extension is unavailable.  Same contracts as
``_core_cy``: configurations are bit masks, bit k set = spin up on site k.
"""

import numpy as np


def zz_quadratic(n_sites: int, pair_w: np.ndarray) -> np.ndarray:
    """Q[s] = sum_{i<j} w_ij sigma_i(s) sigma_j(s) with sigma = +/-1."""
    dim = 1 << n_sites
    states = np.arange(dim, dtype=np.int64)
    out = np.zeros(dim, dtype=np.float64)
    for i in range(n_sites):
        sigma_i = 1.0 - 2.0 * ((states >> i) & 1)
        for j in range(i + 1, n_sites):
            if pair_w[i, j] == 0.0:
                continue
            sigma_j = 1.0 - 2.0 * ((states >> j) & 1)
            out += pair_w[i, j] * sigma_i * sigma_j
    return out


def apply_flips(x: np.ndarray, n_sites: int, amp: float,
                out: np.ndarray) -> None:
    """out[s] += amp * sum_k x[s ^ (1 << k)], via axis-swapped views."""
    for k in range(n_sites):
        step = 1 << k
        xv = x.reshape(-1, 2, step)
        ov = out.reshape(-1, 2, step)
        ov[:, 0, :] += amp * xv[:, 1, :]
        ov[:, 1, :] += amp * xv[:, 0, :]


def matvec(x: np.ndarray, diag: np.ndarray, n_sites: int, amp: float,
           out: np.ndarray) -> None:
    """out[s] = diag[s] x[s] + amp sum_k x[s ^ (1 << k)]."""
    np.multiply(diag, x, out=out)
    apply_flips(x, n_sites, amp, out)
