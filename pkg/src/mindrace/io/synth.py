"""Labeled synthetic EEG for desk-scale testing.

Background activity is spatially smeared 1/f^alpha noise. During each epoch
of a class, the configured frequency bands are amplified by the class gain on
the target channels. Blinks are biphasic raised-cosine pulses with a frontal
topography. Everything is a deterministic function of the config (seed
included).
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from ..core import STANDARD_64, Event, Montage, Recording

MONTAGES: dict[str, tuple[str, ...]] = {
    "standard16": (
        "Fp1", "Fp2", "F7", "F3", "Fz", "F4", "F8", "T7",
        "C3", "Cz", "C4", "T8", "P3", "Pz", "P4", "Oz",
    ),
    "standard24": (
        "Fp1", "Fp2", "AF7", "AF8", "F7", "F3", "Fz", "F4", "F8",
        "FC3", "FC4", "T7", "C3", "Cz", "C4", "T8",
        "CP3", "CP4", "P3", "Pz", "P4", "O1", "Oz", "O2",
    ),
    "standard32": (
        "Fp1", "Fp2", "AF7", "AF3", "AF4", "AF8", "F7", "F3", "Fz", "F4", "F8",
        "FC5", "FC1", "FC2", "FC6", "T7", "C3", "Cz", "C4", "T8",
        "CP5", "CP1", "CP2", "CP6", "P7", "P3", "Pz", "P4", "P8", "O1", "Oz", "O2",
    ),
    "standard63": tuple(n for n in STANDARD_64 if n != "Iz"),
    "standard64": STANDARD_64,
}


@dataclass(frozen=True)
class BandModulation:
    center: float
    bandwidth: float
    gain: float
    channels: tuple[str, ...]
    # spatial falloff (unit-sphere distance); 0 confines the gain to ``channels``
    spread: float = 0.0


@dataclass(frozen=True)
class ClassSpec:
    class_id: int
    label: str
    modulations: tuple[BandModulation, ...] = ()


@dataclass(frozen=True)
class BlinkSpec:
    rate_per_min: float = 0.0
    amplitude_uv: float = 150.0
    duration_s: float = 0.3
    channels: tuple[str, ...] | None = None  # None -> the montage's eye proxies


@dataclass(frozen=True)
class SynthConfig:
    classes: tuple[ClassSpec, ...]
    fs: float = 160.0
    montage: str = "standard16"
    epochs_per_class: int = 20
    epoch_len_s: float = 4.0
    rest_len_s: float = 1.5
    lead_in_s: float = 1.0
    noise_exponent: float = 1.0
    noise_uv: float = 10.0
    shared_fraction: float = 0.7
    epoch_jitter: float = 0.0
    blinks: BlinkSpec = field(default_factory=BlinkSpec)
    seed: int = 0
    subject_id: str = "synth"
    # class-independent rhythms; each epoch draws its gain uniformly in [1, gain]
    distractors: tuple[BandModulation, ...] = ()

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "SynthConfig":
        d = dict(d)
        classes = tuple(
            ClassSpec(int(c["class_id"]), c["label"], tuple(_modulation(m) for m in c.get("modulations", ())))
            for c in d.pop("classes")
        )
        distractors = tuple(_modulation(m) for m in d.pop("distractors", ()))
        blinks = d.pop("blinks", None) or {}
        if blinks.get("channels") is not None:
            blinks["channels"] = tuple(blinks["channels"])
        return cls(classes=classes, blinks=BlinkSpec(**blinks), distractors=distractors, **d)


def _modulation(m: dict) -> BandModulation:
    return BandModulation(
        float(m["center"]), float(m["bandwidth"]), float(m["gain"]),
        tuple(m["channels"]), float(m.get("spread", 0.0)),
    )


def validate_config(cfg: SynthConfig) -> None:
    if cfg.fs <= 0:
        raise ValueError("fs must be positive")
    if cfg.montage not in MONTAGES:
        raise ValueError(f"unknown montage {cfg.montage!r}; choose from {sorted(MONTAGES)}")
    if not cfg.classes:
        raise ValueError("at least one class is required")
    if len({c.class_id for c in cfg.classes}) != len(cfg.classes):
        raise ValueError("class ids must be unique")
    names = set(MONTAGES[cfg.montage])
    top = 0.0
    mods = [(c.label, m) for c in cfg.classes for m in c.modulations]
    mods += [("distractor", m) for m in cfg.distractors]
    for label, m in mods:
        if not m.gain > 0:
            raise ValueError(f"{label!r}: gains must be > 0, got {m.gain}")
        if m.bandwidth <= 0:
            raise ValueError(f"{label!r}: bandwidth must be > 0")
        missing = set(m.channels) - names
        if missing:
            raise ValueError(f"{label!r}: channels {sorted(missing)} not in montage")
        top = max(top, m.center + m.bandwidth)
    if cfg.fs < 2 * top:
        raise ValueError(f"fs={cfg.fs} is below twice the highest modulated frequency ({top} Hz)")
    if cfg.epochs_per_class < 1 or cfg.epoch_len_s <= 0:
        raise ValueError("need at least one epoch per class and a positive epoch length")
    if cfg.blinks.rate_per_min < 0 or cfg.blinks.duration_s <= 0:
        raise ValueError("invalid blink specification")


def pink_noise(rng: np.random.Generator, n_signals: int, n_samples: int, exponent: float) -> np.ndarray:
    """Unit-variance 1/f^exponent noise (power spectrum), zero mean."""
    white = rng.standard_normal((n_signals, n_samples))
    spec = np.fft.rfft(white, axis=1)
    f = np.fft.rfftfreq(n_samples)
    scale = np.zeros_like(f)
    scale[1:] = f[1:] ** (-exponent / 2.0)
    x = np.fft.irfft(spec * scale, n=n_samples, axis=1)
    x -= x.mean(axis=1, keepdims=True)
    std = x.std(axis=1, keepdims=True)
    return x / np.where(std > 0, std, 1.0)


def band_component(x: np.ndarray, fs: float, lo: float, hi: float) -> np.ndarray:
    """Zero-phase brick-wall band [lo, hi) of each row via the FFT."""
    n = x.shape[-1]
    f = np.fft.rfftfreq(n, 1.0 / fs)
    mask = (f >= lo) & (f < hi)
    return np.fft.irfft(np.fft.rfft(x, axis=-1) * mask, n=n, axis=-1)


def blink_template(fs: float, duration_s: float = 0.3) -> np.ndarray:
    """Smooth biphasic pulse with unit peak: Hann envelope times a half cosine."""
    n = max(int(round(duration_s * fs)), 4)
    t = np.arange(n) / (n - 1)
    w = 0.5 * (1 - np.cos(2 * np.pi * t)) * np.cos(np.pi * t)
    return w / np.max(np.abs(w))


def _taper(n: int, ramp: int) -> np.ndarray:
    w = np.ones(n)
    if ramp > 0 and 2 * ramp < n:
        r = 0.5 * (1 - np.cos(np.pi * np.arange(ramp) / ramp))
        w[:ramp] = r
        w[-ramp:] = r[::-1]
    return w


def _modulation_weights(montage: Montage, m: BandModulation) -> np.ndarray:
    w = np.zeros(montage.n_channels)
    idx = montage.indices(m.channels)
    if m.spread <= 0:
        w[idx] = 1.0
        return w
    pos = montage.positions
    d2 = np.min(np.sum((pos[:, None, :] - pos[None, idx, :]) ** 2, axis=-1), axis=1)
    return np.exp(-d2 / (2 * m.spread**2))


def _background(cfg: SynthConfig, rng: np.random.Generator, montage: Montage, n_total: int) -> np.ndarray:
    """Smooth spatial mixture of latent pink sources plus local pink noise."""
    c = montage.n_channels
    pos = montage.positions
    d2 = np.sum((pos[:, None, :] - pos[None, :, :]) ** 2, axis=-1)
    mix = np.exp(-d2 / (2 * 0.5**2))
    mix /= np.linalg.norm(mix, axis=1, keepdims=True)
    shared = mix @ pink_noise(rng, c, n_total, cfg.noise_exponent)
    local = pink_noise(rng, c, n_total, cfg.noise_exponent)
    a = np.sqrt(cfg.shared_fraction)
    return cfg.noise_uv * (a * shared + np.sqrt(1 - a * a) * local)


def _modulate(signal, background, cfg: SynthConfig, rng, montage: Montage, segments) -> None:
    """Apply jitter, class modulations and distractors in place.

    ``segments`` holds ``(onset, length, class_id)``; class id ``None`` marks
    a segment without class modulation.
    """
    fs = cfg.fs
    c = montage.n_channels
    by_id = {cl.class_id: cl for cl in cfg.classes}
    ramp = int(round(0.1 * fs))
    bands: dict[tuple[float, float], np.ndarray] = {}
    for onset, L, cid in segments:
        seg = slice(onset, onset + L)
        env = _taper(L, min(ramp, L // 4))
        if cfg.epoch_jitter > 0:
            g = np.exp(cfg.epoch_jitter * rng.standard_normal(c))
            signal[:, seg] += (g[:, None] - 1.0) * background[:, seg] * env
        mods = [(m, m.gain) for m in (by_id[cid].modulations if cid is not None else ())]
        mods += [(m, rng.uniform(1.0, m.gain)) for m in cfg.distractors]
        for m, gain in mods:
            key = (m.center - m.bandwidth / 2, m.center + m.bandwidth / 2)
            if key not in bands:
                bands[key] = band_component(background, fs, *key)
            w = _modulation_weights(montage, m)
            idx = np.flatnonzero(w > 1e-3)
            signal[idx, seg] += (gain - 1.0) * w[idx, None] * bands[key][idx, seg] * env


def _blinks(cfg: SynthConfig, rng, montage: Montage, n_total: int):
    c = montage.n_channels
    blink = np.zeros((c, n_total))
    source = np.zeros(n_total)
    onsets = np.zeros(0, dtype=int)
    spec = cfg.blinks
    if spec.rate_per_min > 0:
        targets = spec.channels if spec.channels is not None else montage.eye_proxy_channels
        if not targets:
            raise ValueError("blinks requested but no target channels are available")
        tpl = blink_template(cfg.fs, spec.duration_s)
        n_blinks = rng.poisson(spec.rate_per_min * n_total / cfg.fs / 60.0)
        onsets = np.sort(rng.integers(0, n_total - len(tpl), size=n_blinks))
        for o in onsets:
            source[o : o + len(tpl)] += tpl
        pos = montage.positions
        tpos = pos[montage.indices(targets)]
        dist2 = np.min(np.sum((pos[:, None, :] - tpos[None, :, :]) ** 2, axis=-1), axis=1)
        weights = np.exp(-dist2 / (2 * 0.35**2))
        blink = spec.amplitude_uv * weights[:, None] * source[None, :]
    return blink, source, onsets


def synthesize(cfg: SynthConfig) -> tuple[Recording, dict[str, np.ndarray]]:
    """Generate a recording plus its ground-truth parts.

    The parts dict holds ``background``, ``blink`` (channels x samples),
    ``blink_source`` (samples) and ``blink_onsets``; tests use them as oracles.
    """
    validate_config(cfg)
    rng = np.random.default_rng(cfg.seed)
    montage = Montage.standard(MONTAGES[cfg.montage])
    fs = cfg.fs
    L = int(round(cfg.epoch_len_s * fs))
    rest = int(round(cfg.rest_len_s * fs))
    lead = int(round(cfg.lead_in_s * fs))

    order = np.repeat([cl.class_id for cl in cfg.classes], cfg.epochs_per_class)
    order = rng.permutation(order)
    n_total = lead + len(order) * (L + rest)
    background = _background(cfg, rng, montage, n_total)
    signal = background.copy()
    segments = [(lead + k * (L + rest), L, int(cid)) for k, cid in enumerate(order)]
    _modulate(signal, background, cfg, rng, montage, segments)
    labels = {cl.class_id: cl.label for cl in cfg.classes}
    events = tuple(Event(onset, labels[cid], L) for onset, L, cid in segments)
    blink, source, onsets = _blinks(cfg, rng, montage, n_total)
    signal += blink
    rec = Recording(signal, fs, montage, events, cfg.subject_id)
    parts = {"background": background, "blink": blink, "blink_source": source, "blink_onsets": onsets}
    return rec, parts


def synthesize_blocks(cfg: SynthConfig, class_ids, block_s: float) -> Recording:
    """Continuous recording made of back-to-back blocks, one class per block.

    ``None`` entries leave a block unmodulated. Used to build replay streams
    with a scripted class sequence.
    """
    validate_config(cfg)
    rng = np.random.default_rng(cfg.seed)
    montage = Montage.standard(MONTAGES[cfg.montage])
    B = int(round(block_s * cfg.fs))
    n_total = B * len(class_ids)
    if n_total == 0:
        raise ValueError("need at least one block")
    background = _background(cfg, rng, montage, n_total)
    signal = background.copy()
    segments = [(k * B, B, None if cid is None else int(cid)) for k, cid in enumerate(class_ids)]
    _modulate(signal, background, cfg, rng, montage, segments)
    labels = {cl.class_id: cl.label for cl in cfg.classes}
    events = tuple(Event(o, labels[c], L) for o, L, c in segments if c is not None)
    signal += _blinks(cfg, rng, montage, n_total)[0]
    return Recording(signal, cfg.fs, montage, events, cfg.subject_id)


def synth_dataset(cfg: SynthConfig) -> Recording:
    return synthesize(cfg)[0]


# --- named presets used by tests, the CLI and the acceptance suite ---------

_LEFT = ("C3",)
_RIGHT = ("C4",)


def _lateral(names: tuple[str, ...], side: str) -> tuple[str, ...]:
    """Channels of one hemisphere's sensorimotor strip present in a montage."""
    pool = {
        "left": ("FC5", "FC3", "FC1", "C5", "C3", "C1", "CP5", "CP3", "CP1"),
        "right": ("FC6", "FC4", "FC2", "C6", "C4", "C2", "CP6", "CP4", "CP2"),
        "mid": ("FCz", "Cz", "CPz", "Fz", "Pz"),
    }[side]
    return tuple(n for n in pool if n in names)


def two_class_config(
    seed: int = 0,
    montage: str = "standard16",
    epochs_per_class: int = 20,
    bands: tuple[tuple[float, float], ...] = ((11.0, 8.0), (21.0, 12.0)),
    gain: float = 2.0,
    spread: float = 0.4,
    **kw,
) -> SynthConfig:
    """Active/Calm set: Active amplifies the given bands over the left
    sensorimotor strip, Calm over the right one."""
    names = MONTAGES[montage]
    left, right = _lateral(names, "left"), _lateral(names, "right")
    active = tuple(BandModulation(c, bw, gain, left, spread) for c, bw in bands)
    calm = tuple(BandModulation(c, bw, gain, right, spread) for c, bw in bands)
    return SynthConfig(
        classes=(ClassSpec(0, "Calm", calm), ClassSpec(1, "Active", active)),
        montage=montage,
        epochs_per_class=epochs_per_class,
        seed=seed,
        **kw,
    )


def four_class_config(
    seed: int = 0,
    montage: str = "standard16",
    epochs_per_class: int = 20,
    bands: tuple[tuple[float, float], ...] = ((11.0, 8.0), (21.0, 12.0)),
    gain: float = 2.0,
    spread: float = 0.4,
    **kw,
) -> SynthConfig:
    """LeftHand/RightHand/BothHands/BothLegs with distinct topographies."""
    names = MONTAGES[montage]
    left, right, mid = _lateral(names, "left"), _lateral(names, "right"), _lateral(names, "mid")
    frontal = tuple(n for n in ("F3", "Fz", "F4", "FC1", "FC2") if n in names)
    topo = {0: right, 1: left, 2: left + right, 3: mid or frontal}
    labels = ("LeftHand", "RightHand", "BothHands", "BothLegs")
    classes = tuple(
        ClassSpec(k, labels[k], tuple(BandModulation(c, bw, gain, topo[k], spread) for c, bw in bands))
        for k in range(4)
    )
    return SynthConfig(classes=classes, montage=montage, epochs_per_class=epochs_per_class, seed=seed, **kw)


def band_split_config(
    seed: int = 0,
    montage: str = "standard16",
    epochs_per_class: int = 20,
    gain: float = 10.0,
    distractor_gain: float = 80.0,
    spread: float = 0.4,
    distractor_bands: tuple[tuple[float, float], ...] = ((7.5, 1.0), (15.5, 3.0), (27.5, 5.0)),
    **kw,
) -> SynthConfig:
    """Active/Calm set whose class information sits only in 10-12 Hz and 20-22 Hz.

    Other parts of the alpha and beta ranges carry strong class-independent
    rhythms with a random per-epoch gain on each hemisphere, so averaging a
    whole canonical band mixes the informative bins with distractors. The
    distractors sit at least two bins away from the informative bands to limit
    rectangular-window leakage into them.
    """
    names = MONTAGES[montage]
    left, right = _lateral(names, "left"), _lateral(names, "right")
    info = ((11.0, 2.0), (21.0, 2.0))
    active = tuple(BandModulation(c, bw, gain, left, spread) for c, bw in info)
    calm = tuple(BandModulation(c, bw, gain, right, spread) for c, bw in info)
    distractors = tuple(
        BandModulation(c, bw, distractor_gain, side, spread) for c, bw in distractor_bands for side in (left, right)
    )
    return SynthConfig(
        classes=(ClassSpec(0, "Calm", calm), ClassSpec(1, "Active", active)),
        montage=montage,
        epochs_per_class=epochs_per_class,
        seed=seed,
        distractors=distractors,
        **kw,
    )
