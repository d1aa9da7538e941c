import csv
import itertools
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats as sps

from mindrace.core import TWO_CLASS
from mindrace.eval import (
    CvConfig, band_comparison, bonferroni, config_fingerprint, cross_validate, epoch_kfold_split,
    friedman_test, learning_curve, pairwise_wilcoxon, shuffle_epoch_labels, wilcoxon_signed_rank,
    write_band_report,
)
from mindrace.eval.cv import fold_spectra
from mindrace.eval.stats import friedman_statistic
from mindrace.io import epochs_from_events, synthesize, two_class_config


# --- Wilcoxon ------------------------------------------------------------------------

def _enumerated_p(d):
    """Two-sided p by listing all 2^n sign patterns (oracle)."""
    d = d[d != 0]
    r = sps.rankdata(np.abs(d))
    w = r[d > 0].sum()
    ws = np.array([sum(rk for rk, s in zip(r, signs) if s) for signs in itertools.product([0, 1], repeat=len(r))])
    lo, hi = np.mean(ws <= w + 1e-9), np.mean(ws >= w - 1e-9)
    return min(1.0, 2 * min(lo, hi))


def test_wilcoxon_identical_samples_is_an_error():
    with pytest.raises(ValueError, match="zero"):
        wilcoxon_signed_rank([1, 2, 3, 4, 5], [1, 2, 3, 4, 5])


def test_wilcoxon_five_positive_differences():
    w, p = wilcoxon_signed_rank([2, 3, 4, 5, 6], [1, 1, 1, 1, 1])
    assert w == 15 and p == pytest.approx(2 / 32)


def test_wilcoxon_symmetric_differences():
    d = np.array([1, -1, 2, -2, 3, -3, 4, -4], float)
    w, p = wilcoxon_signed_rank(d, np.zeros_like(d))
    assert w == pytest.approx(18) and p == pytest.approx(1.0)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(-6, 6), min_size=5, max_size=12))
def test_wilcoxon_exact_matches_enumeration(diffs):
    d = np.array(diffs, float)
    if np.count_nonzero(d) < 5:
        with pytest.raises(ValueError):
            wilcoxon_signed_rank(d, np.zeros_like(d))
        return
    _, p = wilcoxon_signed_rank(d, np.zeros_like(d))
    assert p == pytest.approx(_enumerated_p(d), abs=1e-12)


@settings(max_examples=20, deadline=None)
@given(st.integers(13, 60), st.integers(0, 2**31))
def test_wilcoxon_large_n_matches_normal_approximation(n, seed):
    rng = np.random.default_rng(seed)
    a, b = rng.normal(size=n), rng.normal(size=n) + 0.3
    w, p = wilcoxon_signed_rank(a, b)
    ref = sps.wilcoxon(a, b, method="approx", correction=True)
    assert p == pytest.approx(ref.pvalue, rel=1e-9, abs=1e-12)


# --- Friedman --------------------------------------------------------------------------

def test_friedman_identical_bands():
    assert friedman_test(np.full((6, 4), 0.7)) == (0.0, 1.0)


def test_friedman_hand_ranked_example():
    # row ranks [1,2,3] [1,3,2] [1,2,3] [2,1,3] [1,2,3] -> rank sums 6, 10, 14
    # chi2 = 12 / (5*3*4) * (36 + 100 + 196) - 3*5*4 = 6.4
    table = np.array([[1, 2, 3], [1, 3, 2], [1, 2, 3], [2, 1, 3], [1, 2, 3]], float) / 10
    chi2, p = friedman_test(table)
    assert chi2 == pytest.approx(6.4)
    # exact p: all 6^5 within-row permutations
    stats_ = [friedman_statistic(np.array(rows)) for rows in itertools.product(itertools.permutations([1, 2, 3]), repeat=5)]
    assert p == pytest.approx(np.mean(np.array(stats_) >= 6.4 - 1e-9), abs=1e-12)


def test_friedman_four_treatments_uses_chi_square():
    # every row ranked [1,2,3,4] -> rank sums 5, 10, 15, 20
    # chi2 = 12 / (5*4*5) * 750 - 3*5*5 = 15, df = 3
    table = np.tile(np.arange(4.0), (5, 1))
    chi2, p = friedman_test(table)
    assert chi2 == pytest.approx(15.0) and p == pytest.approx(sps.chi2.sf(15.0, 3))


def _perm_p(table, n_perm, rng):
    obs = friedman_statistic(table)
    hits = 0
    for _ in range(n_perm):
        hits += friedman_statistic(rng.permuted(table, axis=1)) >= obs - 1e-12
    return hits / n_perm


@pytest.mark.parametrize("seed", range(4))
def test_friedman_matches_permutation_oracle(seed):
    rng = np.random.default_rng(seed)
    table = rng.random((10, 3)) + np.array([0, 0.1, 0.2]) * seed
    _, p = friedman_test(table)
    assert abs(p - _perm_p(table, 4000, rng)) < 0.05


def test_friedman_one_band_always_best():
    rng = np.random.default_rng(7)
    table = rng.random((10, 3))
    table[:, 2] = 2.0
    _, p = friedman_test(table)
    assert abs(p - _perm_p(table, 4000, rng)) < 0.05


def test_friedman_preconditions():
    with pytest.raises(ValueError):
        friedman_test(np.random.default_rng(0).random((5, 2)))
    with pytest.raises(ValueError):
        friedman_test(np.random.default_rng(0).random((4, 3)))


# --- Bonferroni --------------------------------------------------------------------------

def test_bonferroni_examples():
    np.testing.assert_allclose(bonferroni([0.01]), [0.01])
    np.testing.assert_allclose(bonferroni([0.02, 0.5]), [0.04, 1.0])
    np.testing.assert_allclose(bonferroni([0.3] * 10), 1.0)
    with pytest.raises(ValueError):
        bonferroni([1.2])


@given(st.lists(st.floats(0, 1), min_size=1, max_size=30))
def test_bonferroni_monotone_and_clamped(p):
    adj = bonferroni(p)
    assert np.all(adj <= 1) and np.all(adj >= np.asarray(p))
    order = np.argsort(p, kind="stable")
    assert np.all(np.diff(adj[order]) >= 0)


# --- learning curve -----------------------------------------------------------------------

def test_learning_curve_linear_and_constant():
    slope, icpt, p = learning_curve([200, 190, 180, 170, 160])
    assert slope == pytest.approx(-10) and icpt == pytest.approx(200) and p < 1e-6
    assert learning_curve([150, 150, 150]) == (0.0, 150.0, 1.0)
    with pytest.raises(ValueError):
        learning_curve([1, 2])


# --- splitting and cross-validation -----------------------------------------------------

def test_forty_epochs_give_five_folds_of_eight():
    y = np.repeat([0, 1], 20)
    folds = epoch_kfold_split(y, 5, seed=3)
    assert [len(f) for f in folds] == [8] * 5
    assert all(np.sum(y[f] == 0) == 4 for f in folds)
    assert sorted(np.concatenate(folds)) == list(range(40))
    for a, b in zip(folds, epoch_kfold_split(y, 5, seed=3)):
        np.testing.assert_array_equal(a, b)


@given(st.lists(st.integers(0, 3), min_size=20, max_size=80), st.integers(0, 1000))
def test_folds_partition_and_stratify(labels, seed):
    y = np.array(labels)
    if np.min(np.bincount(y, minlength=4)[np.unique(y)]) < 5:
        return
    folds = epoch_kfold_split(y, 5, seed)
    assert sorted(np.concatenate(folds)) == list(range(len(y)))
    for c in np.unique(y):
        counts = [np.sum(y[f] == c) for f in folds]
        assert max(counts) - min(counts) <= 1


@pytest.fixture(scope="module")
def small_epochs():
    return epochs_from_events(synthesize(two_class_config(seed=4, epochs_per_class=10))[0], TWO_CLASS)


def test_test_windows_never_leave_their_fold(small_epochs):
    folds = epoch_kfold_split(small_epochs.class_ids, 5, 0)
    for test in folds:
        train = np.setdiff1d(np.arange(len(small_epochs)), test)
        spec = fold_spectra(small_epochs, train, test, CvConfig(use_faster=False, shift_s=0.5))
        assert set(spec.test_parents) <= set(test)
        assert not set(spec.test_parents) & set(train)


def test_cv_report_is_consistent_and_deterministic(small_epochs):
    cfg = CvConfig(use_faster=False, shift_s=0.5)
    a = cross_validate(small_epochs, cfg, seed=1)
    b = cross_validate(small_epochs, cfg, seed=1)
    assert a.mean == float(np.mean(a.fold_accuracies))
    assert a.fold_accuracies == b.fold_accuracies and a.fingerprint == b.fingerprint
    assert a.fingerprint == config_fingerprint(cfg.to_dict(), 1)
    assert sum(int(c.sum()) for c in a.confusions) == len(small_epochs) * 7
    json.dumps(a.to_dict())


def test_shuffle_keeps_class_counts(small_epochs):
    s = shuffle_epoch_labels(small_epochs, 3)
    assert sorted(s.class_ids) == sorted(small_epochs.class_ids)


def test_unknown_split_mode(small_epochs):
    with pytest.raises(ValueError):
        cross_validate(small_epochs, CvConfig(use_faster=False), split="random")


# --- band comparison -----------------------------------------------------------------------

def test_identical_bands_take_the_p_equals_one_path():
    acc = np.tile(np.linspace(0.5, 0.9, 6)[:, None], (1, 3))
    raw, adj = pairwise_wilcoxon(acc)
    np.testing.assert_array_equal(raw, 1.0)
    np.testing.assert_array_equal(adj, 1.0)


@pytest.mark.slow
def test_alpha_only_information_favors_alpha_and_ranges(tmp_path):
    ds = [epochs_from_events(synthesize(two_class_config(seed=100 + s, bands=((11, 2),), gain=3.0))[0], TWO_CLASS)
          for s in range(5)]
    rep = band_comparison(ds, cfg=CvConfig(use_faster=False, shift_s=0.25), seed=0)
    mean = {r["band"]: r["mean_accuracy"] for r in rep.summary_rows()}
    for b in ("alpha", "range30", "range40"):
        assert mean[b] >= mean["theta"] + 0.1
    paths = write_band_report(rep, tmp_path)
    d = json.loads(paths["json"].read_text())
    assert np.array(d["wilcoxon_p_bonferroni"]).shape == (6, 6)
    with open(paths["folds"]) as fh:
        assert len(list(csv.DictReader(fh))) == 6 * 5 * 5


@pytest.mark.slow
def test_all_noise_bands_do_not_differ():
    ps = []
    for seed in range(20):
        ds = [shuffle_epoch_labels(epochs_from_events(synthesize(two_class_config(seed=1000 * seed + s, epochs_per_class=10))[0],
                                                      TWO_CLASS), seed) for s in range(5)]
        ps.append(band_comparison(ds, cfg=CvConfig(use_faster=False, shift_s=0.5), seed=seed).friedman_p)
    assert np.mean(np.array(ps) > 0.05) >= 0.9
