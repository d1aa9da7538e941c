"""FASTER artifact rejection: offline calibration and per-window online use.

Offline (over a training epoch set):
    1. globally bad channels (variance, correlation, Hurst)
    2. bad epochs (amplitude range, deviation, variance), offline only
    3. ICA component rejection (EOG correlation, kurtosis, power gradient,
       Hurst, median gradient)
    4. per-epoch bad channels (variance, median gradient, amplitude range,
       deviation), interpolated with spherical splines

Every decision is ``|z| > 3`` on a logged metric.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field

import numpy as np

from ..core import EpochSet, Montage
from ..io.container import read_blob, write_blob
from .ica import IcaConvergenceWarning, fit_ica
from .spline import interpolate_channels
from .stats import (
    THRESHOLD,
    abs_correlation,
    excess_kurtosis,
    hurst_rows,
    median_gradient,
    power_gradient,
    zscores,
)

log = logging.getLogger(__name__)


@dataclass
class MetricTable:
    """Named metric columns over items, their z-scores and the flagged items."""

    items: list
    metrics: dict[str, np.ndarray] = field(default_factory=dict)
    z: dict[str, np.ndarray] = field(default_factory=dict)
    rejected: list = field(default_factory=list)

    def flag(self, threshold: float = THRESHOLD) -> list:
        hit = np.zeros(len(self.items), dtype=bool)
        for name, values in self.metrics.items():
            self.z[name] = zscores(values)
            hit |= np.abs(self.z[name]) > threshold
        self.rejected = [self.items[i] for i in np.flatnonzero(hit)]
        return self.rejected

    def to_dict(self) -> dict:
        return {
            "items": [str(i) for i in self.items],
            "metrics": {k: v.tolist() for k, v in self.metrics.items()},
            "z": {k: v.tolist() for k, v in self.z.items()},
            "rejected": [str(i) for i in self.rejected],
        }


@dataclass
class FasterReport:
    channels: MetricTable | None = None
    epochs: MetricTable | None = None
    components: MetricTable | None = None
    epoch_channels: list[MetricTable] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "channels": self.channels.to_dict() if self.channels else None,
            "epochs": self.epochs.to_dict() if self.epochs else None,
            "components": self.components.to_dict() if self.components else None,
            "epoch_channels": [t.to_dict() for t in self.epoch_channels],
            "notes": list(self.notes),
        }


@dataclass(frozen=True, eq=False)
class FasterModel:
    bad_channels: frozenset[str]
    whitening: np.ndarray  # k x g (g good channels)
    unmixing: np.ndarray  # k x k
    mixing: np.ndarray  # g x k
    rejected_components: frozenset[int]
    channel_means: np.ndarray  # c, all channels
    montage: Montage
    fs: float = 0.0

    @property
    def good_index(self) -> np.ndarray:
        return np.array([i for i, n in enumerate(self.montage.channel_names) if n not in self.bad_channels], dtype=int)

    @property
    def n_components(self) -> int:
        return self.unmixing.shape[0]

    @classmethod
    def identity(cls, montage: Montage, fs: float = 0.0) -> "FasterModel":
        """No bad channels, no rejected components, identity unmixing."""
        c = montage.n_channels
        eye = np.eye(c)
        return cls(frozenset(), eye, eye, eye, frozenset(), np.zeros(c), montage, fs)


# --- step 1 ----------------------------------------------------------------


def _concat(epochs: EpochSet) -> np.ndarray:
    d = epochs.data
    return np.transpose(d, (1, 0, 2)).reshape(d.shape[1], -1)


def channel_metrics(data: np.ndarray, names) -> MetricTable:
    """Variance, negated mean |correlation| with the other channels, Hurst."""
    corr = abs_correlation(data, data)
    c = corr.shape[0]
    np.fill_diagonal(corr, 0.0)
    mean_corr = corr.sum(axis=1) / max(c - 1, 1)
    return MetricTable(
        list(names),
        {
            "variance": data.var(axis=1),
            # low correlation is the suspicious direction
            "correlation": -mean_corr,
            "hurst": hurst_rows(data),
        },
    )


def detect_bad_channels(epochs: EpochSet) -> tuple[list[str], MetricTable]:
    if epochs.data.shape[1] < 4:
        raise ValueError("bad-channel detection needs at least 4 channels")
    if len(epochs) < 2:
        raise ValueError("bad-channel detection needs at least 2 epochs")
    table = channel_metrics(_concat(epochs), epochs.montage.channel_names)
    return table.flag(), table


# --- step 2 ----------------------------------------------------------------


def epoch_metrics(data: np.ndarray) -> MetricTable:
    """data: epochs x channels x samples."""
    ch_mean = data.mean(axis=2)
    return MetricTable(
        list(range(data.shape[0])),
        {
            "amplitude_range": np.ptp(data, axis=2).mean(axis=1),
            "deviation": np.abs(ch_mean - ch_mean.mean(axis=0)).mean(axis=1),
            "variance": data.var(axis=2).mean(axis=1),
        },
    )


def reject_bad_epochs(epochs: EpochSet, exclude_channels=()) -> tuple[EpochSet, list[int], MetricTable]:
    """Drop epochs with any |z| > 3. ``exclude_channels`` are left out of the metrics."""
    if len(epochs) < 3:
        raise ValueError("epoch rejection needs at least 3 epochs")
    keep_ch = [i for i, n in enumerate(epochs.montage.channel_names) if n not in set(exclude_channels)]
    table = epoch_metrics(epochs.data[:, keep_ch, :])
    bad = table.flag()
    keep = [i for i in range(len(epochs)) if i not in set(bad)]
    return epochs.select(keep), list(bad), table


# --- step 3 ----------------------------------------------------------------


def component_metrics(components: np.ndarray, eog: np.ndarray | None, fs: float) -> MetricTable:
    metrics = {}
    if eog is not None and eog.shape[0]:
        metrics["eog_correlation"] = abs_correlation(components, eog).max(axis=1)
    metrics["kurtosis"] = excess_kurtosis(components)
    metrics["power_gradient"] = power_gradient(components, fs)
    metrics["hurst"] = hurst_rows(components)
    metrics["median_gradient"] = median_gradient(components)
    return MetricTable(list(range(components.shape[0])), metrics)


def detect_bad_components(components: np.ndarray, eog: np.ndarray | None, fs: float) -> tuple[list[int], MetricTable]:
    if components.shape[0] < 3:
        raise ValueError("component rejection needs at least 3 components")
    if eog is None or eog.shape[0] == 0:
        warnings.warn("no EOG proxy channels: skipping the EOG-correlation metric", stacklevel=2)
        eog = None
    table = component_metrics(components, eog, fs)
    return table.flag(), table


# --- step 4 ----------------------------------------------------------------


def epoch_channel_metrics(data: np.ndarray, reference_means: np.ndarray, names) -> MetricTable:
    """data: channels x samples of one epoch; metrics compared across channels."""
    return MetricTable(
        list(names),
        {
            "variance": data.var(axis=1),
            "median_gradient": median_gradient(data),
            "amplitude_range": np.ptp(data, axis=1),
            "deviation": data.mean(axis=1) - reference_means,
        },
    )


def _check_epoch_channels(data, reference_means, montage: Montage, skip: set[str], report: FasterReport | None):
    names = montage.channel_names
    idx = [i for i, n in enumerate(names) if n not in skip]
    if len(idx) < 2:
        return data, []
    table = epoch_channel_metrics(data[idx], reference_means[idx], [names[i] for i in idx])
    flagged = table.flag()
    if report is not None:
        report.epoch_channels.append(table)
    if not flagged:
        return data, []
    bad = set(flagged) | skip
    if 2 * len(bad) >= len(names):
        if report is not None:
            report.notes.append(f"too many bad channels ({len(bad)}); epoch left uninterpolated")
        return data, []
    return interpolate_channels(data, sorted(bad), montage), flagged


# --- pipeline --------------------------------------------------------------


def _eog_rows(data_full: np.ndarray, montage: Montage) -> np.ndarray | None:
    if not montage.eye_proxy_channels:
        return None
    return data_full[montage.indices(montage.eye_proxy_channels)]


def faster_offline(epochs: EpochSet, montage: Montage | None = None, seed: int = 0) -> tuple[EpochSet, FasterModel, FasterReport]:
    """Run the four offline steps; returns cleaned epochs, the model and the report."""
    montage = montage or epochs.montage
    if len(epochs) < 8:
        raise ValueError("offline FASTER needs at least 8 epochs")
    report = FasterReport()
    names = montage.channel_names

    bad_names, report.channels = detect_bad_channels(epochs)
    bad_set = set(bad_names)
    if 2 * len(bad_set) >= montage.n_channels:
        raise ValueError(f"too many globally bad channels: {sorted(bad_set)}")
    data = epochs.data
    if bad_set:
        data = np.stack([interpolate_channels(e, sorted(bad_set), montage) for e in data])
    work = epochs.with_data(data)

    kept, dropped, report.epochs = reject_bad_epochs(work, exclude_channels=bad_set)
    if len(kept) < 2:
        raise ValueError("epoch rejection left fewer than two epochs")

    good = np.array([i for i, n in enumerate(names) if n not in bad_set], dtype=int)
    cont = _concat(kept)
    channel_means = cont.mean(axis=1)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", IcaConvergenceWarning)
        ica = fit_ica(cont[good], seed=seed)
    for w in caught:
        report.notes.append(str(w.message))
    sources = ica.sources(cont[good])
    rejected, report.components = detect_bad_components(sources, _eog_rows(cont, montage), kept.fs)

    model = FasterModel(
        frozenset(bad_set), ica.whitening, ica.unmixing, ica.mixing,
        frozenset(int(r) for r in rejected), channel_means, montage, epochs.fs,
    )
    cleaned = np.stack([_apply_ica(model, e) for e in kept.data])
    out = np.empty_like(cleaned)
    for i, e in enumerate(cleaned):
        out[i], _ = _check_epoch_channels(e, channel_means, montage, bad_set, report)
    return kept.with_data(out), model, report


def _apply_ica(model: FasterModel, x: np.ndarray) -> np.ndarray:
    """Zero rejected components on good channels, then re-interpolate bad ones."""
    good = model.good_index
    out = np.array(x, dtype=float, copy=True)
    if model.rejected_components:
        mean = model.channel_means[good][:, None]
        S = model.unmixing @ model.whitening @ (out[good] - mean)
        S[sorted(model.rejected_components)] = 0.0
        out[good] = model.mixing @ S + mean
    if model.bad_channels:
        out = interpolate_channels(out, sorted(model.bad_channels), model.montage)
    return out


def decompose_reconstruct(model: FasterModel, x: np.ndarray, rejected=()) -> np.ndarray:
    """Project good channels to components and back, zeroing ``rejected``."""
    good = model.good_index
    mean = model.channel_means[good][:, None]
    S = model.unmixing @ model.whitening @ (x[good] - mean)
    if len(rejected):
        S[sorted(rejected)] = 0.0
    out = np.array(x, dtype=float, copy=True)
    out[good] = model.mixing @ S + mean
    return out


def faster_online_apply(model: FasterModel, window: np.ndarray, check_channels: bool = True, report: FasterReport | None = None) -> np.ndarray:
    """Clean one window: bad-channel interpolation, component filtering and the
    within-window channel check. Pure function of ``(model, window)``."""
    x = np.asarray(window, dtype=float)
    if x.ndim != 2 or x.shape[0] != model.montage.n_channels:
        raise ValueError(f"window has {x.shape[0] if x.ndim == 2 else '?'} channels, model expects {model.montage.n_channels}")
    out = _apply_ica(model, x)
    if check_channels:
        out, _ = _check_epoch_channels(out, model.channel_means, model.montage, set(model.bad_channels), report)
    return out


# --- persistence -----------------------------------------------------------


def save_faster_model(model: FasterModel, path, extra: dict | None = None) -> None:
    header = {
        "bad_channels": sorted(model.bad_channels),
        "rejected_components": sorted(model.rejected_components),
        "montage": model.montage.to_dict(),
        "fs": model.fs,
    }
    if extra:
        header["extra"] = extra
    write_blob(path, "faster_model", header, {
        "whitening": model.whitening.astype(np.float64),
        "unmixing": model.unmixing.astype(np.float64),
        "mixing": model.mixing.astype(np.float64),
        "channel_means": model.channel_means.astype(np.float64),
    })


def load_faster_model(path) -> FasterModel:
    header, arrays = read_blob(path, kind="faster_model")
    return FasterModel(
        frozenset(header["bad_channels"]),
        arrays["whitening"], arrays["unmixing"], arrays["mixing"],
        frozenset(int(i) for i in header["rejected_components"]),
        arrays["channel_means"],
        Montage.from_dict(header["montage"]),
        float(header.get("fs", 0.0)),
    )
