"""Binary C-SVM trained with SMO (maximal-violating-pair working sets)."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .._kernels import smo_solve
from .kernels import KernelSpec, kernel_matrix, scale_gamma


class ConvergenceWarning(UserWarning):
    pass


@dataclass(frozen=True, eq=False)
class BinarySvmModel:
    support_vectors: np.ndarray  # m x n
    dual_coef: np.ndarray  # alpha_i * y_i
    bias: float
    kernel: KernelSpec
    positive_class: int = 1
    negative_class: int = -1
    # training diagnostics
    n_iter: int = 0
    converged: bool = True
    objective: float = float("nan")
    kkt_gap: float = float("nan")


def resolve_kernel(kernel, X: np.ndarray) -> KernelSpec:
    """``KernelSpec`` as given, or a kind name with the data-scaled gamma."""
    if isinstance(kernel, KernelSpec):
        return kernel
    kind = kernel or "rbf"
    return KernelSpec(kind, gamma=scale_gamma(X))


def _bias(alpha, grad, y, C):
    # LIBSVM rule: average y*G over free vectors, else midpoint of the bounds
    yg = y * grad
    upper = alpha >= C
    lower = alpha <= 0
    free = ~(upper | lower)
    if free.any():
        rho = yg[free].mean()
    else:
        ub_mask = (upper & (y < 0)) | (lower & (y > 0))
        lb_mask = (upper & (y > 0)) | (lower & (y < 0))
        ub = yg[ub_mask].min() if ub_mask.any() else np.inf
        lb = yg[lb_mask].max() if lb_mask.any() else -np.inf
        rho = 0.5 * (ub + lb) if np.isfinite(ub) and np.isfinite(lb) else (ub if np.isfinite(ub) else lb)
    return -float(rho)


def kkt_violation(alpha, grad, y, C) -> float:
    """Maximal violating-pair gap m(alpha) - M(alpha) (<= 0 means exact optimum)."""
    v = -y * grad
    up = ((y > 0) & (alpha < C)) | ((y < 0) & (alpha > 0))
    low = ((y > 0) & (alpha > 0)) | ((y < 0) & (alpha < C))
    if not up.any() or not low.any():
        return 0.0
    return float(v[up].max() - v[low].min())


def solve_dual(K: np.ndarray, y: np.ndarray, C: float, tol: float = 1e-3, max_iter: int = 1_000_000, backend=None):
    """Raw dual solution ``(alpha, bias, info)`` for a precomputed kernel."""
    alpha, grad, it, conv = smo_solve(K, y, C, tol, max_iter, backend)
    np.clip(alpha, 0.0, C, out=alpha)
    info = {
        "n_iter": it,
        "converged": conv,
        "objective": float(0.5 * alpha @ (grad - 1.0)),
        "kkt_gap": kkt_violation(alpha, grad, y, C),
    }
    return alpha, _bias(alpha, grad, y, C), info


def train_binary_svm(
    X,
    y,
    C: float = 1.0,
    kernel: KernelSpec | str | None = "rbf",
    tol: float = 1e-3,
    max_iter: int = 1_000_000,
    positive_class: int = 1,
    negative_class: int = -1,
    backend=None,
) -> BinarySvmModel:
    """Train on labels in {-1, +1}. Returns only the support vectors (alpha > 0)."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise ValueError("X must be (m, n) with one label per row")
    if not np.all(np.isin(y, (-1.0, 1.0))):
        raise ValueError("labels must be -1 or +1")
    if X.shape[0] < 2 or np.all(y == y[0]):
        raise ValueError("training data must contain both classes")
    if not C > 0:
        raise ValueError("C must be > 0")
    k = resolve_kernel(kernel, X)
    K = kernel_matrix(k, X, X)
    alpha, b, info = solve_dual(K, y, C, tol, max_iter, backend)
    if not info["converged"]:
        warnings.warn(
            f"SMO stopped after {info['n_iter']} iterations with KKT gap {info['kkt_gap']:.3g}",
            ConvergenceWarning,
            stacklevel=2,
        )
    sv = alpha > 0
    return BinarySvmModel(
        X[sv].copy(), (alpha * y)[sv], b, k, positive_class, negative_class,
        info["n_iter"], info["converged"], info["objective"], info["kkt_gap"],
    )


def decision_function(model: BinarySvmModel, X) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if model.support_vectors.shape[0] == 0:
        return np.full(X.shape[0], model.bias)
    if X.shape[1] != model.support_vectors.shape[1]:
        raise ValueError(f"expected {model.support_vectors.shape[1]} features, got {X.shape[1]}")
    return kernel_matrix(model.kernel, X, model.support_vectors) @ model.dual_coef + model.bias


def predict_binary(model: BinarySvmModel, x) -> tuple[int, float]:
    """``(label, f(x))`` with label in {-1, +1}; f == 0 maps to +1."""
    f = float(decision_function(model, np.asarray(x, dtype=float)[None, :])[0])
    return (1 if f >= 0 else -1), f
