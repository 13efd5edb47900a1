"""Hamming-windowed Fourier spectroscopy and peak-to-gap assignment.

The transform of a channel O(t_n), n = 0..N-1 on a uniform grid is

    F(w_k) = sum_n w_n [O(t_n) - mean(O)] exp(+i w_k t_n),
    w_n = 0.54 - 0.46 cos(2 pi n / (N-1)),   w_k = 2 pi k / (N dt).

Peaks of |F| below the Nyquist frequency are refined by 3-point parabolic
interpolation of the log magnitude and matched to effective-theory gaps.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .sw import GapEntry, GapTable

__all__ = [
    "Spectrum",
    "PeakAssignment",
    "hamming_window",
    "fft_spectrum",
    "detect_peaks",
    "match_gaps",
]


@dataclass
class Spectrum:
    omegas: np.ndarray
    magnitudes: np.ndarray
    window: str
    t_window: tuple

    @property
    def bin_width(self) -> float:
        return float(self.omegas[1] - self.omegas[0]) if len(self.omegas) > 1 else 0.0


@dataclass
class PeakAssignment:
    peak_omega: float
    peak_magnitude: float
    assigned_gap: GapEntry | None
    residual: float


def hamming_window(N: int) -> np.ndarray:
    """Length-N Hamming window 0.54 - 0.46 cos(2 pi n / (N-1))."""
    if N < 2:
        raise ValueError("window needs at least 2 samples")
    n = np.arange(N)
    return 0.54 - 0.46 * np.cos(2.0 * np.pi * n / (N - 1))


def fft_spectrum(times: np.ndarray, values: np.ndarray,
                 t_min: float | None = None,
                 t_max: float | None = None) -> Spectrum:
    """Windowed DFT magnitudes of one channel restricted to [t_min, t_max]."""
    times = np.asarray(times, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    if times.ndim != 1 or times.shape != values.shape:
        raise ValueError("times and values must be equal-length 1D arrays")
    if len(times) >= 3:
        steps = np.diff(times)
        if np.max(np.abs(steps - steps[0])) > 1e-9 * max(abs(steps[0]), 1e-30):
            raise ValueError("time grid is not uniform")
    lo = times[0] if t_min is None else t_min
    hi = times[-1] if t_max is None else t_max
    sel = (times >= lo - 1e-12) & (times <= hi + 1e-12)
    t = times[sel]
    y = values[sel]
    n = len(t)
    if n < 2:
        raise ValueError("analysis window contains fewer than 2 samples")
    dt = t[1] - t[0]
    w = hamming_window(n)
    signal = w * (y - y.mean())
    # conj(fft) realizes the e^{+i w t} convention for the real signal;
    # the t[0] offset only contributes a phase
    F = np.conj(np.fft.fft(signal)) * np.exp(1j * (2.0 * np.pi / (n * dt))
                                             * np.arange(n) * t[0])
    omegas = 2.0 * np.pi * np.arange(n) / (n * dt)
    return Spectrum(omegas=omegas, magnitudes=np.abs(F),
                    window="hamming", t_window=(float(t[0]), float(t[-1])))


def detect_peaks(spectrum: Spectrum, rel_threshold: float = 0.05) -> list:
    """Local maxima of |F| above rel_threshold * global max, as (omega, magnitude).

    Zero frequency is excluded together with the bins inside the Hamming
    window's zero-frequency main lobe (|omega| < 3 bins), where any maximum
    is indistinguishable from the residual of the subtracted mean; only
    omegas up to the Nyquist frequency are scanned.  Peak positions are
    refined to sub-bin accuracy by parabolic interpolation of the log
    magnitude.
    """
    if not (0.0 < rel_threshold < 1.0):
        raise ValueError("rel_threshold must lie in (0, 1)")
    m = spectrum.magnitudes
    om = spectrum.omegas
    n = len(m)
    k_lo = 3
    k_nyq = n // 2
    if k_nyq <= k_lo:
        return []
    global_max = float(np.max(m[k_lo:k_nyq + 1]))
    if global_max <= 0.0:
        return []
    cut = rel_threshold * global_max
    dw = spectrum.bin_width
    peaks = []
    for k in range(k_lo, k_nyq):
        if m[k] < cut or m[k] <= m[k - 1] or m[k] < m[k + 1]:
            continue
        omega = om[k]
        if m[k - 1] > 0.0 and m[k + 1] > 0.0:
            lm, l0, lp = np.log(m[k - 1]), np.log(m[k]), np.log(m[k + 1])
            denom = lm - 2.0 * l0 + lp
            if denom < 0.0:
                delta = 0.5 * (lm - lp) / denom
                omega = om[k] + float(np.clip(delta, -0.5, 0.5)) * dw
        peaks.append((float(omega), float(m[k])))
    return peaks


def match_gaps(peaks, gaps: GapTable, tol: float) -> list:
    """Assign peaks to the nearest gaps within tol, each gap used at most once.

    Globally greedy in ascending residual, so the result does not depend on
    the order peaks are listed in.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    candidates = []
    for p_idx, (omega, _mag) in enumerate(peaks):
        for g_idx, entry in enumerate(gaps.entries):
            r = abs(omega - entry.delta)
            if r <= tol:
                candidates.append((r, p_idx, g_idx))
    candidates.sort()
    assigned_peak = {}
    used_gap = set()
    for r, p_idx, g_idx in candidates:
        if p_idx in assigned_peak or g_idx in used_gap:
            continue
        assigned_peak[p_idx] = (g_idx, r)
        used_gap.add(g_idx)
    out = []
    for p_idx, (omega, mag) in enumerate(peaks):
        if p_idx in assigned_peak:
            g_idx, r = assigned_peak[p_idx]
            out.append(PeakAssignment(peak_omega=omega, peak_magnitude=mag,
                                      assigned_gap=gaps.entries[g_idx],
                                      residual=r))
        else:
            out.append(PeakAssignment(peak_omega=omega, peak_magnitude=mag,
                                      assigned_gap=None, residual=np.inf))
    return out
