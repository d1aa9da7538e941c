"""One-vs-one multiclass reduction with pairwise voting."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .binary import BinarySvmModel, decision_function, resolve_kernel, train_binary_svm
from .kernels import KernelSpec, kernel_matrix


@dataclass(frozen=True, eq=False)
class MulticlassSvmModel:
    classes: tuple[int, ...]
    pairs: tuple[BinarySvmModel, ...]  # ordered as combinations(classes, 2)


def train_multiclass(X, y, C: float = 1.0, kernel: KernelSpec | str | None = "rbf", tol: float = 1e-3, backend=None) -> MulticlassSvmModel:
    """One binary SVM per class pair (lower id is the +1 side). The kernel
    width is resolved once on the full training matrix."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y)
    classes = tuple(int(c) for c in np.unique(y))
    if len(classes) < 2:
        raise ValueError("need at least two classes")
    k = resolve_kernel(kernel, X)
    models = []
    for a, b in combinations(classes, 2):
        rows = (y == a) | (y == b)
        yy = np.where(y[rows] == a, 1.0, -1.0)
        models.append(train_binary_svm(X[rows], yy, C, k, tol, positive_class=a, negative_class=b, backend=backend))
    return MulticlassSvmModel(classes, tuple(models))


def pairwise_scores(model: MulticlassSvmModel, X) -> tuple[np.ndarray, np.ndarray]:
    """Per-class vote counts and summed winning |f|, both (n, K)."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    n, K = X.shape[0], len(model.classes)
    votes = np.zeros((n, K))
    conf = np.zeros((n, K))
    pos = {c: i for i, c in enumerate(model.classes)}
    # pairs share the kernel; one matrix over the union of support vectors
    sv_all = [m.support_vectors for m in model.pairs]
    if model.pairs and all(s.shape[0] for s in sv_all):
        stacked = np.concatenate(sv_all)
        Kx = kernel_matrix(model.pairs[0].kernel, X, stacked)
        start = 0
        fs = []
        for m in model.pairs:
            stop = start + m.support_vectors.shape[0]
            fs.append(Kx[:, start:stop] @ m.dual_coef + m.bias)
            start = stop
    else:
        fs = [decision_function(m, X) for m in model.pairs]
    for m, f in zip(model.pairs, fs):
        a, b = pos[m.positive_class], pos[m.negative_class]
        win_a = f >= 0
        votes[win_a, a] += 1
        votes[~win_a, b] += 1
        conf[win_a, a] += np.abs(f[win_a])
        conf[~win_a, b] += np.abs(f[~win_a])
    return votes, conf


def resolve_votes(votes: np.ndarray, conf: np.ndarray) -> np.ndarray:
    """Column index of the winner per row: most votes, then largest summed
    margin, then the lowest index."""
    top = votes == votes.max(axis=1, keepdims=True)
    masked = np.where(top, conf, -np.inf)
    return np.argmax(masked, axis=1)


def predict_multiclass_batch(model: MulticlassSvmModel, X) -> tuple[np.ndarray, np.ndarray]:
    """Predicted class ids and the winner's summed margin for each row."""
    votes, conf = pairwise_scores(model, X)
    w = resolve_votes(votes, conf)
    rows = np.arange(len(w))
    return np.asarray(model.classes)[w], conf[rows, w]


def predict_multiclass(model: MulticlassSvmModel, x) -> int:
    return int(predict_multiclass_batch(model, np.asarray(x, dtype=float)[None, :])[0][0])
