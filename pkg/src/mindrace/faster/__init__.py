from .ica import IcaResult, fit_ica
from .pipeline import (
    FasterModel,
    FasterReport,
    MetricTable,
    decompose_reconstruct,
    detect_bad_channels,
    detect_bad_components,
    faster_offline,
    faster_online_apply,
    load_faster_model,
    reject_bad_epochs,
    save_faster_model,
)
from .spline import interpolate_channels
from .stats import hurst_exponent, zscores

__all__ = [
    "IcaResult", "fit_ica", "FasterModel", "FasterReport", "MetricTable",
    "decompose_reconstruct", "detect_bad_channels", "detect_bad_components",
    "faster_offline", "faster_online_apply", "load_faster_model", "reject_bad_epochs",
    "save_faster_model", "interpolate_channels", "hurst_exponent", "zscores",
]
