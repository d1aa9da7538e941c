from __future__ import annotations

import numpy as np

from .._kernels import rs_mean

THRESHOLD = 3.0


def zscores(values) -> np.ndarray:
    """(x - mean) / std with the population std; all zeros if std == 0."""
    v = np.asarray(values, dtype=float)
    if v.ndim != 1 or v.size < 2:
        raise ValueError("z-scores need a vector of length >= 2")
    sd = v.std()
    if not sd > 0 or not np.isfinite(sd):
        return np.zeros_like(v)
    return (v - v.mean()) / sd


def outliers(values, threshold: float = THRESHOLD) -> np.ndarray:
    """Indices whose |z| exceeds ``threshold``."""
    return np.flatnonzero(np.abs(zscores(values)) > threshold)


def hurst_exponent(series, backend=None) -> tuple[float, bool]:
    """Rescaled-range Hurst estimate and a degenerate-input flag.

    Mean R/S is computed on non-overlapping blocks of n = 8, 16, ..., len/2
    samples; H is the least-squares slope of log(R/S) against log(n), clamped
    to [0, 1.5]. Constant input returns ``(0.5, True)``.
    """
    x = np.asarray(series, dtype=float)
    if x.ndim != 1 or x.size < 64:
        raise ValueError("Hurst estimation needs a 1-D series of at least 64 samples")
    if np.ptp(x) == 0:
        return 0.5, True
    sizes = []
    n = 8
    while n <= x.size // 2:
        sizes.append(n)
        n *= 2
    rs = np.array([rs_mean(x, n, backend) for n in sizes])
    ok = np.isfinite(rs) & (rs > 0)
    if ok.sum() < 2:
        return 0.5, True
    slope = np.polyfit(np.log(np.asarray(sizes, float)[ok]), np.log(rs[ok]), 1)[0]
    return float(np.clip(slope, 0.0, 1.5)), False


def hurst_rows(data: np.ndarray, backend=None) -> np.ndarray:
    return np.array([hurst_exponent(row, backend)[0] for row in np.atleast_2d(data)])


def median_gradient(data: np.ndarray) -> np.ndarray:
    return np.median(np.abs(np.diff(data, axis=-1)), axis=-1)


def excess_kurtosis(data: np.ndarray) -> np.ndarray:
    d = data - data.mean(axis=-1, keepdims=True)
    m2 = np.mean(d * d, axis=-1)
    m4 = np.mean(d**4, axis=-1)
    with np.errstate(invalid="ignore", divide="ignore"):
        k = m4 / (m2 * m2) - 3.0
    return np.where(m2 > 0, k, 0.0)


def power_gradient(data: np.ndarray, fs: float, lo: float = 25.0, hi: float = 45.0) -> np.ndarray:
    """Slope of a straight line fitted to log power over ``[lo, min(hi, fs/2 - 1)]``.

    The spectrum is a Welch-style average of 1-second periodograms (Hann taper,
    50 % overlap) so the slope is not dominated by single-bin noise.
    """
    from scipy.signal import welch

    hi = min(hi, fs / 2 - 1)
    nper = min(int(round(fs)), data.shape[-1])
    f, p = welch(data, fs=fs, nperseg=nper, axis=-1)
    band = (f >= lo) & (f <= hi)
    if band.sum() < 2:
        raise ValueError(f"power-gradient band [{lo}, {hi}] Hz has fewer than two bins")
    logp = np.log(np.maximum(p[..., band], np.finfo(float).tiny))
    fb = f[band]
    fc = fb - fb.mean()
    return (logp - logp.mean(axis=-1, keepdims=True)) @ fc / np.sum(fc * fc)


def abs_correlation(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """|Pearson r| between every row of ``a`` and every row of ``b``."""
    a = a - a.mean(axis=-1, keepdims=True)
    b = b - b.mean(axis=-1, keepdims=True)
    na = np.linalg.norm(a, axis=-1)
    nb = np.linalg.norm(b, axis=-1)
    with np.errstate(invalid="ignore", divide="ignore"):
        r = (a @ b.T) / np.outer(na, nb)
    return np.abs(np.nan_to_num(r))
