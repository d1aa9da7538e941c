from .bands import DEFAULT_BANDS, BandComparisonReport, band_comparison, pairwise_wilcoxon, write_band_report, write_cv_csv
from .cv import (
    CvConfig,
    CvReport,
    config_fingerprint,
    cross_validate,
    epoch_kfold_split,
    shuffle_epoch_labels,
    window_kfold_split,
)
from .stats import bonferroni, friedman_test, learning_curve, wilcoxon_signed_rank

__all__ = [
    "DEFAULT_BANDS", "BandComparisonReport", "band_comparison", "pairwise_wilcoxon",
    "write_band_report", "write_cv_csv", "CvConfig", "CvReport", "config_fingerprint",
    "cross_validate", "epoch_kfold_split", "shuffle_epoch_labels", "window_kfold_split",
    "bonferroni", "friedman_test", "learning_curve", "wilcoxon_signed_rank",
]
