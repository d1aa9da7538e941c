"""Spherical spline interpolation of bad channels (Perrin et al. 1989)."""

from __future__ import annotations

from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import legval

from ..core import Montage

STIFFNESS = 4
N_TERMS = 50
RIDGE = 1e-5


def legendre_g(cosang: np.ndarray, m: int = STIFFNESS, n_terms: int = N_TERMS) -> np.ndarray:
    """g(x) = sum_{n=1..N} (2n+1) / (n^m (n+1)^m) P_n(x)."""
    n = np.arange(1, n_terms + 1, dtype=float)
    coef = np.concatenate([[0.0], (2 * n + 1) / (n**m * (n + 1) ** m)])
    return legval(np.clip(cosang, -1.0, 1.0), coef)


@lru_cache(maxsize=32)
def _gram(positions_key: bytes, n: int) -> np.ndarray:
    pos = np.frombuffer(positions_key).reshape(n, 3)
    return legendre_g(pos @ pos.T)


def spline_gram(positions: np.ndarray) -> np.ndarray:
    pos = np.ascontiguousarray(positions, dtype=float)
    return _gram(pos.tobytes(), pos.shape[0])


def interpolation_matrix(positions: np.ndarray, good: np.ndarray, bad: np.ndarray, ridge: float = RIDGE) -> np.ndarray:
    """Matrix M (n_bad x n_good) with ``V_bad = M @ V_good``.

    Solves ``[[G + ridge I, 1], [1', 0]] [c; c0] = [V; 0]`` on the good
    electrodes, so constants are reproduced exactly.
    """
    good = np.asarray(good, dtype=int)
    bad = np.asarray(bad, dtype=int)
    G = spline_gram(positions)
    ng = good.size
    A = np.zeros((ng + 1, ng + 1))
    A[:ng, :ng] = G[np.ix_(good, good)] + ridge * np.eye(ng)
    A[:ng, ng] = 1.0
    A[ng, :ng] = 1.0
    rhs = np.zeros((ng + 1, ng))
    rhs[:ng] = np.eye(ng)
    coef = np.linalg.solve(A, rhs)  # (ng+1) x ng: maps good values -> [c; c0]
    B = np.ones((bad.size, ng + 1))
    B[:, :ng] = G[np.ix_(bad, good)]
    return B @ coef


def interpolate_channels(data: np.ndarray, bad, montage: Montage) -> np.ndarray:
    """Replace ``bad`` channels (names or indices) of ``data`` (channels x ...)."""
    data = np.asarray(data, dtype=float)
    c = montage.n_channels
    if data.shape[0] != c:
        raise ValueError(f"data has {data.shape[0]} channels, montage has {c}")
    bad_idx = sorted({montage.index(b) if isinstance(b, str) else int(b) for b in bad})
    if not bad_idx:
        return data.copy()
    if 2 * len(bad_idx) >= c:
        raise ValueError(f"too many bad channels to interpolate ({len(bad_idx)} of {c})")
    good_idx = [i for i in range(c) if i not in set(bad_idx)]
    pos = montage.positions[good_idx]
    d = np.sum((pos[:, None] - pos[None]) ** 2, axis=-1)
    np.fill_diagonal(d, np.inf)
    if np.min(d) < 1e-12:
        raise ValueError("coincident electrode positions")
    M = interpolation_matrix(montage.positions, np.array(good_idx), np.array(bad_idx))
    out = data.copy()
    flat = data.reshape(c, -1)
    out.reshape(c, -1)[bad_idx] = M @ flat[good_idx]
    return out
