"""Sliding windows, FFT magnitude spectra and band features.

Band intervals are half-open, ``[f_low, f_high)``, so adjacent 2 Hz bins of the
range features never share an FFT bin.
"""

from __future__ import annotations

import struct
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import Epoch, EpochSet, Window

BANDS: dict[str, tuple[float, float]] = {
    "theta": (4.0, 7.0),
    "alpha": (7.0, 14.0),
    "beta": (14.0, 30.0),
    "gamma": (30.0, 40.0),
    "range30": (4.0, 30.0),
    "range40": (2.0, 40.0),
}
RANGE_BANDS = frozenset({"range30", "range40"})


class DegenerateFeature(ValueError):
    pass


@dataclass(frozen=True)
class BandSpec:
    kind: str
    f_low: float
    f_high: float

    @classmethod
    def named(cls, kind: str) -> "BandSpec":
        if kind not in BANDS:
            raise ValueError(f"unknown band {kind!r}; choose from {sorted(BANDS)}")
        return cls(kind, *BANDS[kind])

    @property
    def is_range(self) -> bool:
        return self.kind in RANGE_BANDS or self.kind == "custom-range"

    def validate(self, fs: float) -> None:
        if not self.f_low < self.f_high <= fs / 2:
            raise ValueError(f"band [{self.f_low}, {self.f_high}) invalid for fs={fs}")

    def edges(self) -> list[tuple[float, float]]:
        """Column band edges: one 2 Hz bin per column for range kinds, else one."""
        if self.is_range:
            return range_edges(self.f_low, self.f_high)
        return [(self.f_low, self.f_high)]


@dataclass(frozen=True)
class Spectrum:
    magnitudes: np.ndarray  # channels x F
    df: float
    fs: float


@dataclass(frozen=True)
class FeatureMatrix:
    values: np.ndarray  # channels x B
    band_edges: tuple[tuple[float, float], ...]
    parent_epoch: int = -1
    offset: int = 0
    class_id: int = -1


# --- windows ---------------------------------------------------------------


def window_count(L: int, W: int, step: int) -> int:
    if L < W:
        raise ValueError(f"epoch of {L} samples is shorter than the {W}-sample window")
    return (L - W) // step + 1


def slide_windows(epoch: Epoch, win_s: float = 1.0, shift_s: float = 0.1) -> list[Window]:
    W = int(round(win_s * epoch.fs))
    step = int(round(shift_s * epoch.fs))
    n = window_count(epoch.data.shape[1], W, step)
    return [
        Window(epoch.data[:, k * step : k * step + W], epoch.epoch_index, k * step, epoch.class_id)
        for k in range(n)
    ]


def window_array(epochs: EpochSet, win_s: float = 1.0, shift_s: float = 0.1):
    """All windows of an epoch set as one array.

    Returns ``(windows, parent, offsets, labels)`` with ``windows`` shaped
    (n_windows, channels, W); ``parent`` indexes into ``epochs``.
    """
    fs = epochs.fs
    W = int(round(win_s * fs))
    step = int(round(shift_s * fs))
    n = window_count(epochs.n_samples, W, step)
    offsets = np.arange(n) * step
    idx = offsets[:, None] + np.arange(W)[None, :]
    win = epochs.data[:, :, idx]  # epochs x channels x n x W
    win = np.moveaxis(win, 2, 1).reshape(len(epochs) * n, epochs.data.shape[1], W)
    parent = np.repeat(np.arange(len(epochs)), n)
    labels = np.repeat(epochs.class_ids, n)
    return win, parent, np.tile(offsets, len(epochs)), labels


# --- spectra ---------------------------------------------------------------


def fft_abs_array(x: np.ndarray) -> np.ndarray:
    """|rfft| along the last axis; no taper, no detrending."""
    return np.abs(np.fft.rfft(x, axis=-1))


def fft_abs(window: Window | np.ndarray, fs: float | None = None) -> Spectrum:
    data = window.data if isinstance(window, Window) else np.asarray(window, dtype=float)
    if data.shape[-1] < 2:
        raise ValueError("window needs at least 2 samples")
    if fs is None:
        fs = float(data.shape[-1])  # one-second window: fs == W
    W = data.shape[-1]
    return Spectrum(fft_abs_array(data), fs / W, fs)


def band_bins(df: float, n_bins: int, f_low: float, f_high: float) -> np.ndarray:
    """Indices of FFT bins with ``f_low <= k*df < f_high``."""
    k = np.arange(n_bins)
    f = k * df
    eps = 1e-9 * max(df, 1.0)
    return k[(f >= f_low - eps) & (f < f_high - eps)]


def range_edges(f_low: float, f_high: float) -> list[tuple[float, float]]:
    span = f_high - f_low
    if span < 2 or abs(span / 2 - round(span / 2)) > 1e-9:
        raise ValueError(f"range [{f_low}, {f_high}) must span an even number of Hz >= 2")
    return [(f_low + 2 * j, f_low + 2 * j + 2) for j in range(int(round(span / 2)))]


def band_average(mag: np.ndarray, df: float, f_low: float, f_high: float) -> np.ndarray:
    """Mean magnitude over the band's bins along the last axis."""
    bins = band_bins(df, mag.shape[-1], f_low, f_high)
    if bins.size == 0:
        raise ValueError(f"band [{f_low}, {f_high}) contains no FFT bins at df={df}")
    return mag[..., bins].mean(axis=-1)


def feature_average(s: Spectrum, f_low: float, f_high: float) -> np.ndarray:
    if f_high > s.fs / 2 + 1e-9:
        raise ValueError(f"f_high={f_high} exceeds the Nyquist frequency {s.fs / 2}")
    return band_average(s.magnitudes, s.df, f_low, f_high)[:, None]


def feature_range(s: Spectrum, f_low: float, f_high: float) -> FeatureMatrix:
    edges = range_edges(f_low, f_high)
    if f_high > s.fs / 2 + 1e-9:
        raise ValueError(f"f_high={f_high} exceeds the Nyquist frequency {s.fs / 2}")
    cols = [band_average(s.magnitudes, s.df, lo, hi) for lo, hi in edges]
    return FeatureMatrix(np.stack(cols, axis=-1), tuple(edges))


def band_features(mag: np.ndarray, df: float, band: BandSpec) -> np.ndarray:
    """Batch features: (..., channels, F) magnitudes -> (..., channels, B)."""
    return np.stack([band_average(mag, df, lo, hi) for lo, hi in band.edges()], axis=-1)


# --- normalization ---------------------------------------------------------


def l2_normalize(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    norm = np.sqrt(np.sum(np.abs(v) ** 2))
    if not norm > 0:
        raise DegenerateFeature("degenerate feature: zero vector cannot be L2-normalized")
    return v / norm


def normalize_features(F: np.ndarray, mode: str = "per_bin") -> np.ndarray:
    """L2-normalize features shaped (..., channels, B).

    ``per_bin`` scales every column (one channel vector per frequency bin) to
    unit norm; ``per_window`` scales each whole channels x B matrix; ``none``
    returns the input unchanged.
    """
    F = np.asarray(F, dtype=float)
    if mode == "none":
        return F
    if mode == "per_bin":
        norm = np.sqrt(np.sum(F * F, axis=-2, keepdims=True))
    elif mode == "per_window":
        norm = np.sqrt(np.sum(F * F, axis=(-2, -1), keepdims=True))
    else:
        raise ValueError(f"unknown normalization {mode!r}")
    if np.any(~(norm > 0)):
        raise DegenerateFeature("degenerate feature: zero vector cannot be L2-normalized")
    return F / norm


def window_features(windows: np.ndarray, fs: float, band: BandSpec, normalization: str = "per_bin") -> np.ndarray:
    """Windows (n, channels, W) -> normalized features (n, channels, B)."""
    W = windows.shape[-1]
    band.validate(fs)
    mag = fft_abs_array(windows)
    return normalize_features(band_features(mag, fs / W, band), normalization)


# --- columnar feature files ------------------------------------------------

_FEAT_MAGIC = b"MRF1"


def write_feature_batch(path, values: np.ndarray, band_edges, channel_names, labels, parents=None) -> None:
    """Columnar float32 file: header (band edges, channel names) + payload.

    Layout: magic, uint32 header length, JSON header, then little-endian
    float32 values (n, channels, B) followed by int32 labels and parents.
    """
    values = np.asarray(values, dtype="<f4")
    n = values.shape[0]
    parents = np.full(n, -1) if parents is None else np.asarray(parents)
    header = {
        "shape": list(values.shape),
        "band_edges": [list(map(float, e)) for e in band_edges],
        "channel_names": list(channel_names),
    }
    hdr = json.dumps(header, sort_keys=True).encode()
    with open(path, "wb") as f:
        f.write(_FEAT_MAGIC + struct.pack("<I", len(hdr)) + hdr)
        f.write(values.tobytes())
        f.write(np.asarray(labels, dtype="<i4").tobytes())
        f.write(np.asarray(parents, dtype="<i4").tobytes())


def read_feature_batch(path):
    raw = Path(path).read_bytes()
    if raw[:4] != _FEAT_MAGIC:
        raise ValueError(f"{path}: not a feature batch file")
    (hlen,) = struct.unpack("<I", raw[4:8])
    header = json.loads(raw[8 : 8 + hlen])
    shape = header["shape"]
    n = shape[0]
    nval = int(np.prod(shape))
    off = 8 + hlen
    expected = off + 4 * nval + 8 * n
    if len(raw) != expected:
        raise ValueError(f"{path}: corrupt feature batch ({len(raw)} bytes, expected {expected})")
    values = np.frombuffer(raw, "<f4", nval, off).reshape(shape).astype(np.float32)
    labels = np.frombuffer(raw, "<i4", n, off + 4 * nval).astype(int)
    parents = np.frombuffer(raw, "<i4", n, off + 4 * nval + 4 * n).astype(int)
    return values, [tuple(e) for e in header["band_edges"]], header["channel_names"], labels, parents
