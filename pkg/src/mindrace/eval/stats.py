"""Non-parametric tests used for band comparisons and learning curves."""

from __future__ import annotations

import itertools
import math

import numpy as np
from scipy import stats

EXACT_MAX_N = 12
# three-treatment Friedman tables up to this many rows get the exact permutation p
FRIEDMAN_EXACT_MAX_N = 30


def _signed_ranks(a, b) -> tuple[np.ndarray, np.ndarray]:
    d = np.asarray(a, dtype=float) - np.asarray(b, dtype=float)
    if d.ndim != 1:
        raise ValueError("paired samples must be 1-D")
    d = d[d != 0]
    if d.size == 0:
        raise ValueError("all paired differences are zero")
    ranks = stats.rankdata(np.abs(d))
    return d, ranks


def wilcoxon_exact_pvalue(ranks: np.ndarray, w_plus: float) -> float:
    """Two-sided exact p of ``W+`` given the (possibly tied) absolute ranks.

    The null distribution over the 2^n sign patterns is built by dynamic
    programming on doubled ranks, which are integers even with average ties.
    """
    r2 = np.rint(2 * np.asarray(ranks)).astype(int)
    total = int(r2.sum())
    counts = np.zeros(total + 1)
    counts[0] = 1.0
    for r in r2:
        counts[r:] = counts[r:] + counts[: total + 1 - r].copy()
    pmf = counts / counts.sum()
    w2 = int(round(2 * w_plus))
    lower = pmf[: w2 + 1].sum()
    upper = pmf[w2:].sum()
    return float(min(1.0, 2.0 * min(lower, upper)))


def wilcoxon_signed_rank(a, b) -> tuple[float, float]:
    """Two-sided signed-rank test; returns ``(W+, p)``.

    Zero differences are dropped. Exact for n <= 12, otherwise a normal
    approximation with tie and continuity corrections.
    """
    d, ranks = _signed_ranks(a, b)
    n = d.size
    if n < 5:
        raise ValueError(f"need at least 5 non-zero differences, got {n}")
    w_plus = float(ranks[d > 0].sum())
    if n <= EXACT_MAX_N:
        return w_plus, wilcoxon_exact_pvalue(ranks, w_plus)
    mean = n * (n + 1) / 4.0
    _, t = np.unique(ranks, return_counts=True)
    var = n * (n + 1) * (2 * n + 1) / 24.0 - np.sum(t**3 - t) / 48.0
    dev = abs(w_plus - mean) - 0.5
    if dev <= 0:
        return w_plus, 1.0
    return w_plus, float(min(1.0, 2.0 * stats.norm.sf(dev / math.sqrt(var))))


def friedman_statistic(results) -> float:
    R = np.asarray(results, dtype=float)
    n, k = R.shape
    ranks = np.apply_along_axis(stats.rankdata, 1, R)
    rbar = ranks.mean(axis=0)
    return float(12.0 * n / (k * (k + 1)) * np.sum((rbar - (k + 1) / 2.0) ** 2))


def friedman_exact_pvalue(ranks: np.ndarray, chi2: float) -> float:
    """P(statistic >= chi2) when each row's ranks are permuted uniformly (k = 3).

    Dynamic programming over the doubled rank sums of the first two columns;
    the third is fixed by the row totals.
    """
    r2 = np.rint(2 * np.asarray(ranks)).astype(int)
    n, k = r2.shape
    if k != 3:
        raise ValueError("exact Friedman p is implemented for three treatments")
    size = int(r2.max(axis=1).sum()) + 1
    prob = np.zeros((size, size))
    prob[0, 0] = 1.0
    for row in r2:
        nxt = np.zeros_like(prob)
        for a, b, _ in itertools.permutations(row):
            nxt[a:, b:] += prob[: size - a, : size - b] / 6.0
        prob = nxt
    total = int(r2.sum())
    s1, s2 = np.nonzero(prob > 0)
    s3 = total - s1 - s2
    sq = (s1**2 + s2**2 + s3**2) / 4.0
    stat = 12.0 / (n * k * (k + 1)) * sq - 3.0 * n * (k + 1)
    return float(min(1.0, prob[s1, s2][stat >= chi2 - 1e-9].sum()))


def friedman_test(results) -> tuple[float, float]:
    """Friedman chi-square over an experiments x treatments matrix.

    Ranks are taken within rows (average ranks on ties). For three treatments
    and at most 30 rows the p-value is the exact permutation probability, since
    the chi-square approximation is off by up to 0.1 there; otherwise it comes
    from the chi-square distribution with k - 1 degrees of freedom.
    """
    R = np.asarray(results, dtype=float)
    if R.ndim != 2:
        raise ValueError("results must be a 2-D experiments x treatments matrix")
    n, k = R.shape
    if k < 3 or n < 5:
        raise ValueError(f"need >= 3 treatments and >= 5 experiments, got {k} and {n}")
    chi2 = friedman_statistic(R)
    if chi2 <= 0:
        return 0.0, 1.0
    if k == 3 and n <= FRIEDMAN_EXACT_MAX_N:
        ranks = np.apply_along_axis(stats.rankdata, 1, R)
        return chi2, friedman_exact_pvalue(ranks, chi2)
    return chi2, float(stats.chi2.sf(chi2, k - 1))


def bonferroni(p_values) -> np.ndarray:
    p = np.asarray(p_values, dtype=float)
    if np.any((p < 0) | (p > 1)):
        raise ValueError("p-values must lie in [0, 1]")
    return np.minimum(1.0, p * p.size)


def learning_curve(times) -> tuple[float, float, float]:
    """OLS of finish time on run index; returns ``(slope, intercept, p)``."""
    y = np.asarray(times, dtype=float)
    if y.ndim != 1 or y.size < 3:
        raise ValueError("a learning curve needs at least 3 runs")
    x = np.arange(y.size, dtype=float)
    if np.ptp(y) == 0:
        return 0.0, float(y[0]), 1.0
    fit = stats.linregress(x, y)
    p = float(fit.pvalue) if np.isfinite(fit.pvalue) else 0.0
    return float(fit.slope), float(fit.intercept), p
