"""Inner loops with a compiled and a vectorized numpy variant.

Each kernel exists twice: ``*_jit`` (explicit loops, compiled by numba when
available) and ``*_np`` (vectorized numpy). The public names dispatch on the
backend chosen in :mod:`mindrace._accel`. Both variants follow the same
selection and tie rules so they agree to floating-point rounding.
"""

from __future__ import annotations

import numpy as np

from ._accel import njit, use_numba

# ---------------------------------------------------------------------------
# SMO for the C-SVM dual:  min 1/2 a'Qa - e'a,  0 <= a <= C,  y'a = 0
# Q_ij = y_i y_j K_ij. Working set = maximal violating pair.
# ---------------------------------------------------------------------------

_TAU = 1e-12


@njit
def _smo_jit(K, y, C, tol, max_iter):
    m = y.shape[0]
    alpha = np.zeros(m)
    grad = -np.ones(m)
    it = 0
    converged = False
    while it < max_iter:
        # i: argmax over I_up of -y*grad ; j: argmin over I_low of -y*grad
        gmax = -np.inf
        gmin = np.inf
        i = -1
        j = -1
        for t in range(m):
            v = -y[t] * grad[t]
            if (y[t] > 0 and alpha[t] < C) or (y[t] < 0 and alpha[t] > 0):
                if v > gmax:
                    gmax = v
                    i = t
            if (y[t] > 0 and alpha[t] > 0) or (y[t] < 0 and alpha[t] < C):
                if v < gmin:
                    gmin = v
                    j = t
        if i < 0 or j < 0 or gmax - gmin < tol:
            converged = True
            break
        Kii = K[i, i]
        Kjj = K[j, j]
        Kij = K[i, j]
        ai_old = alpha[i]
        aj_old = alpha[j]
        if y[i] != y[j]:
            quad = Kii + Kjj - 2.0 * Kij
            if quad <= 0:
                quad = _TAU
            delta = (-grad[i] - grad[j]) / quad
            diff = ai_old - aj_old
            ai = ai_old + delta
            aj = aj_old + delta
            if diff > 0:
                if aj < 0:
                    aj = 0.0
                    ai = diff
            else:
                if ai < 0:
                    ai = 0.0
                    aj = -diff
            if diff > 0:
                if ai > C:
                    ai = C
                    aj = C - diff
            else:
                if aj > C:
                    aj = C
                    ai = C + diff
        else:
            quad = Kii + Kjj - 2.0 * Kij
            if quad <= 0:
                quad = _TAU
            delta = (grad[i] - grad[j]) / quad
            s = ai_old + aj_old
            ai = ai_old - delta
            aj = aj_old + delta
            if s > C:
                if ai > C:
                    ai = C
                    aj = s - C
            else:
                if aj < 0:
                    aj = 0.0
                    ai = s
            if s > C:
                if aj > C:
                    aj = C
                    ai = s - C
            else:
                if ai < 0:
                    ai = 0.0
                    aj = s
        dai = ai - ai_old
        daj = aj - aj_old
        alpha[i] = ai
        alpha[j] = aj
        yi_dai = y[i] * dai
        yj_daj = y[j] * daj
        for t in range(m):
            grad[t] += y[t] * (K[t, i] * yi_dai + K[t, j] * yj_daj)
        it += 1
    return alpha, grad, it, converged


def _smo_np(K, y, C, tol, max_iter):
    m = y.shape[0]
    alpha = np.zeros(m)
    grad = -np.ones(m)
    pos = y > 0
    neg = ~pos
    it = 0
    converged = False
    while it < max_iter:
        v = -y * grad
        up = (pos & (alpha < C)) | (neg & (alpha > 0))
        low = (pos & (alpha > 0)) | (neg & (alpha < C))
        if not up.any() or not low.any():
            converged = True
            break
        vu = np.where(up, v, -np.inf)
        vl = np.where(low, v, np.inf)
        i = int(np.argmax(vu))
        j = int(np.argmin(vl))
        if vu[i] - vl[j] < tol:
            converged = True
            break
        ai_old, aj_old = alpha[i], alpha[j]
        if y[i] != y[j]:
            quad = K[i, i] + K[j, j] - 2.0 * K[i, j]
            quad = quad if quad > 0 else _TAU
            delta = (-grad[i] - grad[j]) / quad
            diff = ai_old - aj_old
            ai, aj = ai_old + delta, aj_old + delta
            if diff > 0:
                if aj < 0:
                    aj, ai = 0.0, diff
            elif ai < 0:
                ai, aj = 0.0, -diff
            if diff > 0:
                if ai > C:
                    ai, aj = C, C - diff
            elif aj > C:
                aj, ai = C, C + diff
        else:
            quad = K[i, i] + K[j, j] - 2.0 * K[i, j]
            quad = quad if quad > 0 else _TAU
            delta = (grad[i] - grad[j]) / quad
            s = ai_old + aj_old
            ai, aj = ai_old - delta, aj_old + delta
            if s > C:
                if ai > C:
                    ai, aj = C, s - C
            elif aj < 0:
                aj, ai = 0.0, s
            if s > C:
                if aj > C:
                    aj, ai = C, s - C
            elif ai < 0:
                ai, aj = 0.0, s
        dai, daj = ai - ai_old, aj - aj_old
        alpha[i], alpha[j] = ai, aj
        grad += y * (K[:, i] * (y[i] * dai) + K[:, j] * (y[j] * daj))
        it += 1
    return alpha, grad, it, converged


def smo_solve(K, y, C, tol=1e-3, max_iter=1_000_000, backend=None):
    """Solve the SVM dual for kernel matrix ``K`` and labels ``y`` in {-1, +1}.

    Returns ``(alpha, grad, n_iter, converged)`` where ``grad`` is the dual
    gradient ``Q alpha - 1`` at the final iterate.
    """
    K = np.ascontiguousarray(K, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    if backend is None:
        backend = "numba" if use_numba() else "numpy"
    fn = _smo_jit if backend == "numba" else _smo_np
    alpha, grad, it, conv = fn(K, y, float(C), float(tol), int(max_iter))
    return alpha, grad, int(it), bool(conv)


# ---------------------------------------------------------------------------
# Rescaled range: mean R/S over non-overlapping blocks of length n
# ---------------------------------------------------------------------------


@njit
def _rs_mean_jit(x, n):
    nb = x.shape[0] // n
    total = 0.0
    count = 0
    for b in range(nb):
        start = b * n
        mean = 0.0
        for t in range(n):
            mean += x[start + t]
        mean /= n
        cum = 0.0
        cmax = 0.0
        cmin = 0.0
        ss = 0.0
        for t in range(n):
            d = x[start + t] - mean
            cum += d
            ss += d * d
            if cum > cmax:
                cmax = cum
            if cum < cmin:
                cmin = cum
        s = np.sqrt(ss / n)
        if s > 0:
            total += (cmax - cmin) / s
            count += 1
    if count == 0:
        return np.nan
    return total / count


def _rs_mean_np(x, n):
    nb = x.shape[0] // n
    blocks = x[: nb * n].reshape(nb, n)
    dev = blocks - blocks.mean(axis=1, keepdims=True)
    z = np.cumsum(dev, axis=1)
    # the partial sums start from 0, so the range includes the origin
    r = np.maximum(z.max(axis=1), 0.0) - np.minimum(z.min(axis=1), 0.0)
    s = np.sqrt((dev * dev).mean(axis=1))
    ok = s > 0
    if not ok.any():
        return np.nan
    return float(np.mean(r[ok] / s[ok]))


def rs_mean(x, n, backend=None):
    x = np.ascontiguousarray(x, dtype=np.float64)
    if backend is None:
        backend = "numba" if use_numba() else "numpy"
    fn = _rs_mean_jit if backend == "numba" else _rs_mean_np
    return float(fn(x, int(n)))
