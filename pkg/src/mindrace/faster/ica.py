"""FastICA: PCA whitening, log-cosh contrast, symmetric decorrelation."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np


class IcaConvergenceWarning(UserWarning):
    pass


@dataclass(frozen=True, eq=False)
class IcaResult:
    whitening: np.ndarray  # k x c
    unmixing: np.ndarray  # k x k
    mixing: np.ndarray  # c x k
    mean: np.ndarray  # c
    n_iter: int
    converged: bool

    def sources(self, X: np.ndarray) -> np.ndarray:
        return self.unmixing @ self.whitening @ (X - self.mean[:, None])

    def reconstruct(self, S: np.ndarray) -> np.ndarray:
        return self.mixing @ S + self.mean[:, None]


def _sym_decorrelation(W: np.ndarray) -> np.ndarray:
    s, u = np.linalg.eigh(W @ W.T)
    s = np.maximum(s, np.finfo(float).tiny)
    return (u * (1.0 / np.sqrt(s))) @ u.T @ W


def fit_ica(data: np.ndarray, seed: int = 0, tol: float = 1e-4, max_iter: int = 200, rank_tol: float = 1e-10) -> IcaResult:
    """Unmix ``data`` (channels x samples) into independent components.

    Whitening keeps every principal direction whose variance exceeds
    ``rank_tol`` times the largest, so duplicated channels reduce the number of
    components instead of breaking the fit. ``mixing`` is the pseudo-inverse of
    ``unmixing @ whitening``.
    """
    X = np.asarray(data, dtype=float)
    c, n = X.shape
    if n < 20 * c:
        raise ValueError(f"need at least {20 * c} samples for {c} channels, got {n}")
    mean = X.mean(axis=1)
    Xc = X - mean[:, None]
    cov = Xc @ Xc.T / n
    evals, evecs = np.linalg.eigh(cov)
    order = np.argsort(evals)[::-1]
    evals, evecs = evals[order], evecs[:, order]
    keep = evals > rank_tol * max(evals[0], np.finfo(float).tiny)
    evals, evecs = evals[keep], evecs[:, keep]
    k = evals.size
    # sign convention: largest loading of each eigenvector positive
    flip = np.sign(evecs[np.argmax(np.abs(evecs), axis=0), np.arange(k)])
    evecs = evecs * flip
    K = (evecs / np.sqrt(evals)).T  # k x c
    Z = K @ Xc

    rng = np.random.default_rng(seed)
    W = _sym_decorrelation(rng.standard_normal((k, k)))
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        WZ = W @ Z
        g = np.tanh(WZ)
        g_prime = 1.0 - g * g
        W_new = _sym_decorrelation(g @ Z.T / n - g_prime.mean(axis=1)[:, None] * W)
        lim = np.max(np.abs(np.abs(np.einsum("ij,ij->i", W_new, W)) - 1.0))
        W = W_new
        if lim < tol:
            converged = True
            break
    if not converged:
        warnings.warn(f"FastICA did not converge in {max_iter} iterations", IcaConvergenceWarning, stacklevel=2)
    mixing = np.linalg.pinv(W @ K)
    return IcaResult(K, W, mixing, mean, it, converged)
