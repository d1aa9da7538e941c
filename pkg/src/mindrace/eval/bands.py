"""Band comparison: one classifier per band, per experiment, with Friedman and
pairwise Wilcoxon tests on the resulting accuracy matrix."""

from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from ..core import EpochSet
from .cv import CvConfig, CvReport, config_fingerprint, epoch_kfold_split, fold_spectra, score_fold
from .stats import bonferroni, friedman_test, wilcoxon_signed_rank

log = logging.getLogger(__name__)

DEFAULT_BANDS = ("theta", "alpha", "beta", "gamma", "range30", "range40")


@dataclass
class BandComparisonReport:
    bands: tuple[str, ...]
    reports: dict[str, list[CvReport]]
    friedman_stat: float
    friedman_p: float
    wilcoxon_p: np.ndarray  # bands x bands, raw
    wilcoxon_p_adjusted: np.ndarray
    seed: int
    fingerprint: str

    def accuracy_matrix(self) -> np.ndarray:
        """experiments x bands mean accuracies."""
        return np.array([[r.mean for r in self.reports[b]] for b in self.bands]).T

    def summary_rows(self) -> list[dict]:
        acc = self.accuracy_matrix()
        return [
            {"band": b, "mean_accuracy": float(acc[:, j].mean()), "std_accuracy": float(acc[:, j].std()),
             "n_experiments": acc.shape[0]}
            for j, b in enumerate(self.bands)
        ]

    def to_dict(self) -> dict:
        return {
            "bands": list(self.bands),
            "accuracy": self.accuracy_matrix().tolist(),
            "summary": self.summary_rows(),
            "friedman": {"statistic": self.friedman_stat, "p": self.friedman_p},
            "wilcoxon_p": self.wilcoxon_p.tolist(),
            "wilcoxon_p_bonferroni": self.wilcoxon_p_adjusted.tolist(),
            "seed": self.seed,
            "fingerprint": self.fingerprint,
        }


def pairwise_wilcoxon(acc: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Raw and Bonferroni-adjusted p matrices over band columns.

    Pairs the test cannot handle (identical or too few non-zero differences)
    get p = 1.
    """
    k = acc.shape[1]
    raw = np.ones((k, k))
    pairs = [(i, j) for i in range(k) for j in range(i + 1, k)]
    for i, j in pairs:
        try:
            raw[i, j] = raw[j, i] = wilcoxon_signed_rank(acc[:, i], acc[:, j])[1]
        except ValueError as e:
            log.info("wilcoxon %d vs %d: %s", i, j, e)
    adj = np.ones((k, k))
    if pairs:
        flat = bonferroni([raw[i, j] for i, j in pairs])
        for (i, j), p in zip(pairs, flat):
            adj[i, j] = adj[j, i] = p
    return raw, adj


def band_comparison(
    datasets: list[EpochSet],
    bands=DEFAULT_BANDS,
    cfg: CvConfig | None = None,
    n_folds: int = 5,
    seed: int = 0,
    backend=None,
) -> BandComparisonReport:
    """Cross-validate every band on every experiment (dataset).

    FASTER and the FFT are band-independent, so each fold computes them once
    and reuses them for all bands.
    """
    cfg = cfg or CvConfig()
    bands = tuple(bands)
    if len(datasets) < 5:
        raise ValueError(f"need at least 5 experiments, got {len(datasets)}")
    reports: dict[str, list[CvReport]] = {b: [] for b in bands}
    for e, epochs in enumerate(datasets):
        classes = tuple(int(c) for c in np.unique(epochs.class_ids))
        folds = epoch_kfold_split(epochs.class_ids, n_folds, seed)
        per_band = {b: ([], []) for b in bands}
        for k, test in enumerate(folds):
            train = np.setdiff1d(np.arange(len(epochs)), test)
            spec = fold_spectra(epochs, train, test, cfg, seed=seed + k)
            for b in bands:
                acc, conf = score_fold(spec, replace(cfg, band=b), classes, backend)
                per_band[b][0].append(acc)
                per_band[b][1].append(conf)
        for b in bands:
            d = replace(cfg, band=b).to_dict()
            reports[b].append(CvReport(per_band[b][0], per_band[b][1], classes, d, seed, "epoch",
                                       config_fingerprint(d, seed)))
        log.info("experiment %d: %s", e, {b: round(reports[b][-1].mean, 3) for b in bands})
    acc = np.array([[r.mean for r in reports[b]] for b in bands]).T
    stat, p = friedman_test(acc)
    raw, adj = pairwise_wilcoxon(acc)
    fp = config_fingerprint({"cv": cfg.to_dict(), "bands": list(bands), "n_folds": n_folds}, seed)
    return BandComparisonReport(bands, reports, stat, p, raw, adj, seed, fp)


def write_cv_csv(path, rows: list[tuple[str, str, CvReport]]) -> None:
    """One row per (experiment, band, fold)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["experiment", "band", "fold", "accuracy", "seed", "fingerprint"])
        for exp, band, rep in rows:
            for k, a in enumerate(rep.fold_accuracies):
                w.writerow([exp, band, k, f"{a:.6f}", rep.seed, rep.fingerprint])


def write_band_report(report: BandComparisonReport, out_dir, experiment_names=None) -> dict[str, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    names = experiment_names or [f"exp{i}" for i in range(len(report.reports[report.bands[0]]))]
    rows = [(names[i], b, r) for b in report.bands for i, r in enumerate(report.reports[b])]
    paths = {"folds": out / "band_folds.csv", "summary": out / "band_summary.csv", "json": out / "band_report.json"}
    write_cv_csv(paths["folds"], rows)
    with open(paths["summary"], "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=["band", "mean_accuracy", "std_accuracy", "n_experiments"])
        w.writeheader()
        w.writerows(report.summary_rows())
    d = report.to_dict()
    d["experiments"] = list(names)
    paths["json"].write_text(json.dumps(d, indent=2, sort_keys=True))
    return paths
