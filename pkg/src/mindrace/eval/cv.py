"""Epoch-level k-fold cross-validation of the FASTER + features + voting SVM pipeline."""

from __future__ import annotations

import hashlib
import json
import logging
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np

from ..core import EpochSet
from ..faster import faster_offline, faster_online_apply
from ..features import BandSpec, band_features, fft_abs_array, window_array
from ..svm import TiePossibleWarning, predict_voting_batch, train_voting_svm

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class CvConfig:
    band: str = "range40"
    normalization: str = "per_bin"
    C: float = 1.0
    kernel: str = "rbf"
    use_faster: bool = True
    win_s: float = 1.0
    shift_s: float = 0.1
    tol: float = 1e-3

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "CvConfig":
        return cls(**{k: v for k, v in d.items() if k in cls.__dataclass_fields__})


def config_fingerprint(cfg: dict, seed: int) -> str:
    blob = json.dumps({"config": cfg, "seed": int(seed)}, sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


@dataclass
class CvReport:
    fold_accuracies: list[float]
    confusions: list[np.ndarray]
    classes: tuple[int, ...]
    config: dict
    seed: int
    split: str = "epoch"
    fingerprint: str = ""
    notes: list[str] = field(default_factory=list)

    @property
    def mean(self) -> float:
        return float(np.mean(self.fold_accuracies))

    def to_dict(self) -> dict:
        return {
            "mean_accuracy": self.mean,
            "fold_accuracies": list(self.fold_accuracies),
            "confusions": [c.tolist() for c in self.confusions],
            "classes": list(self.classes),
            "config": self.config,
            "seed": self.seed,
            "split": self.split,
            "fingerprint": self.fingerprint,
            "notes": list(self.notes),
        }


# --- splitting -------------------------------------------------------------


def epoch_kfold_split(class_ids, n_folds: int = 5, seed: int = 0) -> list[np.ndarray]:
    """Stratified folds of epoch indices.

    Each class is shuffled and dealt round-robin, starting where the previous
    class stopped, so per-class fold sizes differ by at most one.
    """
    y = np.asarray(class_ids)
    if n_folds < 2:
        raise ValueError("need at least 2 folds")
    rng = np.random.default_rng(seed)
    folds: list[list[int]] = [[] for _ in range(n_folds)]
    start = 0
    for c in np.unique(y):
        idx = np.flatnonzero(y == c)
        if idx.size < n_folds:
            raise ValueError(f"class {c} has {idx.size} epochs, fewer than {n_folds} folds")
        idx = rng.permutation(idx)
        for j, i in enumerate(idx):
            folds[(start + j) % n_folds].append(int(i))
        start = (start + idx.size) % n_folds
    return [np.array(sorted(f), dtype=int) for f in folds]


def window_kfold_split(n_windows: int, n_folds: int = 5, seed: int = 0) -> list[np.ndarray]:
    """Folds over individual windows. Leaks epoch identity; for demonstrations only."""
    perm = np.random.default_rng(seed).permutation(n_windows)
    return [np.sort(f) for f in np.array_split(perm, n_folds)]


# --- fold pipeline ---------------------------------------------------------


@dataclass
class FoldSpectra:
    """Band-independent part of one fold: FFT magnitudes of train and test windows."""

    train_mag: np.ndarray
    train_labels: np.ndarray
    test_mag: np.ndarray
    test_labels: np.ndarray
    test_parents: np.ndarray
    df: float


def fold_spectra(epochs: EpochSet, train: np.ndarray, test: np.ndarray, cfg: CvConfig, seed: int = 0) -> FoldSpectra:
    tr = epochs.select(train)
    te = epochs.select(test)
    if cfg.use_faster:
        tr, model, _ = faster_offline(tr, seed=seed)
    tr_win, _, _, tr_lab = window_array(tr, cfg.win_s, cfg.shift_s)
    te_win, te_par, _, te_lab = window_array(te, cfg.win_s, cfg.shift_s)
    if cfg.use_faster:
        te_win = np.stack([faster_online_apply(model, w) for w in te_win])
    W = tr_win.shape[-1]
    return FoldSpectra(
        fft_abs_array(tr_win), tr_lab, fft_abs_array(te_win), te_lab,
        np.asarray(te.epoch_index)[te_par], epochs.fs / W,
    )


def _confusion(classes, truth, pred) -> np.ndarray:
    k = len(classes)
    pos = {c: i for i, c in enumerate(classes)}
    M = np.zeros((k, k), dtype=int)
    for t, p in zip(truth, pred):
        M[pos[int(t)], pos[int(p)]] += 1
    return M


def score_fold(fs_: FoldSpectra, cfg: CvConfig, classes, backend=None) -> tuple[float, np.ndarray]:
    band = BandSpec.named(cfg.band)
    Ftr = band_features(fs_.train_mag, fs_.df, band)
    Fte = band_features(fs_.test_mag, fs_.df, band)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TiePossibleWarning)
        clf = train_voting_svm(Ftr, fs_.train_labels, C=cfg.C, kernel=cfg.kernel,
                               band_edges=band.edges(), normalization=cfg.normalization,
                               tol=cfg.tol, backend=backend)
    pred = predict_voting_batch(clf, Fte)
    acc = float(np.mean(pred == fs_.test_labels))
    return acc, _confusion(classes, fs_.test_labels, pred)


def cross_validate(
    epochs: EpochSet,
    cfg: CvConfig | None = None,
    n_folds: int = 5,
    seed: int = 0,
    split: str = "epoch",
    backend=None,
) -> CvReport:
    """k-fold CV; FASTER is fit on training epochs only and applied online to test windows.

    Accuracy is window-level within each test fold. ``split="window"`` pools
    all windows before splitting and exists only to show the resulting leakage.
    """
    cfg = cfg or CvConfig()
    classes = tuple(int(c) for c in np.unique(epochs.class_ids))
    if split == "epoch":
        folds = epoch_kfold_split(epochs.class_ids, n_folds, seed)
        all_idx = np.arange(len(epochs))
        accs, confs = [], []
        for k, test in enumerate(folds):
            train = np.setdiff1d(all_idx, test)
            spec = fold_spectra(epochs, train, test, cfg, seed=seed + k)
            acc, conf = score_fold(spec, cfg, classes, backend)
            accs.append(acc)
            confs.append(conf)
            log.debug("fold %d: accuracy %.3f", k, acc)
    elif split == "window":
        accs, confs = _window_split_cv(epochs, cfg, n_folds, seed, classes, backend)
    else:
        raise ValueError(f"unknown split mode {split!r}")
    d = cfg.to_dict()
    return CvReport(accs, confs, classes, d, seed, split, config_fingerprint(d, seed))


def _window_split_cv(epochs, cfg, n_folds, seed, classes, backend):
    data = epochs
    if cfg.use_faster:
        data, _, _ = faster_offline(epochs, seed=seed)
    win, _, _, lab = window_array(data, cfg.win_s, cfg.shift_s)
    mag = fft_abs_array(win)
    df = epochs.fs / win.shape[-1]
    accs, confs = [], []
    for test in window_kfold_split(len(win), n_folds, seed):
        train = np.setdiff1d(np.arange(len(win)), test)
        spec = FoldSpectra(mag[train], lab[train], mag[test], lab[test], test, df)
        acc, conf = score_fold(spec, cfg, classes, backend)
        accs.append(acc)
        confs.append(conf)
    return accs, confs


def shuffle_epoch_labels(epochs: EpochSet, seed: int = 0) -> EpochSet:
    """Permute labels across epochs; windows keep their epoch's (new) label."""
    rng = np.random.default_rng(seed)
    return epochs.with_labels(rng.permutation(epochs.class_ids))
