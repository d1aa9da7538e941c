from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class KernelSpec:
    kind: str = "rbf"
    gamma: float = 1.0
    degree: int = 3
    coef0: float = 0.0

    def __post_init__(self):
        if self.kind not in ("linear", "polynomial", "rbf"):
            raise ValueError(f"unknown kernel {self.kind!r}")
        if self.kind != "linear" and not self.gamma > 0:
            raise ValueError("gamma must be > 0 for polynomial and rbf kernels")

    def to_dict(self) -> dict:
        return {"kind": self.kind, "gamma": self.gamma, "degree": self.degree, "coef0": self.coef0}


def kernel_eval(k: KernelSpec, x, y) -> float:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise ValueError(f"dimension mismatch: {x.shape} vs {y.shape}")
    if k.kind == "rbf":
        # direct difference keeps k(x, x) == 1 exactly
        d = x - y
        return float(np.exp(-k.gamma * (d @ d)))
    return float(kernel_matrix(k, x[None, :], y[None, :])[0, 0])


def kernel_matrix(k: KernelSpec, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    if X.shape[1] != Y.shape[1]:
        raise ValueError(f"dimension mismatch: {X.shape[1]} vs {Y.shape[1]}")
    dot = X @ Y.T
    if k.kind == "linear":
        return dot
    if k.kind == "polynomial":
        return (k.gamma * dot + k.coef0) ** k.degree
    # in place: -gamma * max(|x|^2 + |y|^2 - 2 x.y, 0)
    dot *= -2.0
    dot += np.einsum("ij,ij->i", X, X)[:, None]
    dot += np.einsum("ij,ij->i", Y, Y)[None, :]
    np.maximum(dot, 0.0, out=dot)
    dot *= -k.gamma
    return np.exp(dot, out=dot)


def scale_gamma(X: np.ndarray) -> float:
    """Default RBF width: 1 / (n_features * variance of all entries of X)."""
    X = np.asarray(X, dtype=float)
    var = X.var()
    return 1.0 / (X.shape[1] * var) if var > 0 else 1.0
