"""Shared domain types: montage, recordings, events, epochs, windows, label schemes.

All containers are frozen dataclasses; array fields are marked read-only on
construction so instances can be shared across threads.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from typing import Iterator, Mapping, Sequence

import numpy as np

__all__ = [
    "Command",
    "Montage",
    "Event",
    "Recording",
    "Epoch",
    "EpochSet",
    "Window",
    "LabelScheme",
    "TWO_CLASS",
    "FOUR_CLASS",
    "STANDARD_64",
    "standard_position",
    "validate_recording",
]


class Command(enum.Enum):
    """Active game commands. ``INVALID`` stands for an undecodable byte."""

    LEFT = "Left"
    RIGHT = "Right"
    LIGHT = "Light"
    INVALID = "Invalid"


def _frozen(a, dtype=float) -> np.ndarray:
    arr = np.array(a, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


# 64-channel 10-10 layout (the montage of the public motor-imagery dataset)
STANDARD_64: tuple[str, ...] = (
    "FC5", "FC3", "FC1", "FCz", "FC2", "FC4", "FC6",
    "C5", "C3", "C1", "Cz", "C2", "C4", "C6",
    "CP5", "CP3", "CP1", "CPz", "CP2", "CP4", "CP6",
    "Fp1", "Fpz", "Fp2",
    "AF7", "AF3", "AFz", "AF4", "AF8",
    "F7", "F5", "F3", "F1", "Fz", "F2", "F4", "F6", "F8",
    "FT7", "FT8", "T7", "T8", "T9", "T10", "TP7", "TP8",
    "P7", "P5", "P3", "P1", "Pz", "P2", "P4", "P6", "P8",
    "PO7", "PO3", "POz", "PO4", "PO8",
    "O1", "Oz", "O2", "Iz",
)

# anterior-posterior angle (degrees from the vertex, positive = frontal)
_ROW_ANGLE = {
    "FP": 72.0, "AF": 54.0, "F": 36.0, "FT": 18.0, "FC": 18.0,
    "T": 0.0, "C": 0.0, "TP": -18.0, "CP": -18.0,
    "P": -36.0, "PO": -54.0, "O": -72.0, "I": -90.0,
}
_NAME_RE = re.compile(r"^(FP|AF|FT|FC|TP|CP|PO|F|T|C|P|O|I)(Z|\d+)$")
_EYE_PROXIES = ("Fp1", "Fp2", "AF7", "AF8")


def _canonical(name: str) -> str:
    return name.strip().strip(".").upper()


def standard_position(name: str) -> np.ndarray:
    """Unit-sphere coordinates (x right, y nose, z up) for a 10-10 label.

    Rows sit on 18-degree steps of the nasion-inion arc; columns on 18-degree
    steps of the lateral arc, with 7/8 on the T row mapped to 72 degrees and
    9/10 to the preauricular points.
    """
    m = _NAME_RE.match(_canonical(name))
    if m is None:
        raise ValueError(f"no standard position for channel {name!r}")
    row, col = m.groups()
    ap = np.deg2rad(_ROW_ANGLE[row])
    if col == "Z":
        lat = 0.0
    else:
        k = int(col)
        step = min((k + 1) // 2, 5)
        lat = np.deg2rad(18.0 * step) * (-1.0 if k % 2 else 1.0)
    return np.array([np.sin(lat), np.cos(lat) * np.sin(ap), np.cos(lat) * np.cos(ap)])


@dataclass(frozen=True, eq=False)
class Montage:
    channel_names: tuple[str, ...]
    positions: np.ndarray
    eye_proxy_channels: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "channel_names", tuple(self.channel_names))
        object.__setattr__(self, "eye_proxy_channels", tuple(self.eye_proxy_channels))
        pos = _frozen(self.positions)
        if pos.shape != (len(self.channel_names), 3):
            raise ValueError(
                f"positions shape {pos.shape} does not match {len(self.channel_names)} channels"
            )
        object.__setattr__(self, "positions", pos)
        if len(set(self.channel_names)) != len(self.channel_names):
            raise ValueError("channel names must be unique")
        if not set(self.eye_proxy_channels) <= set(self.channel_names):
            raise ValueError("eye proxy channels must be a subset of the channel names")
        norms = np.linalg.norm(pos, axis=1)
        if pos.size and np.max(np.abs(norms - 1.0)) > 1e-6:
            raise ValueError("electrode positions must lie on the unit sphere")

    @classmethod
    def standard(cls, names: Sequence[str] | None = None, eye_proxies: Sequence[str] | None = None) -> "Montage":
        """Montage from 10-10 labels with computed unit-sphere positions.

        Names are matched case-insensitively (trailing dots from EDF labels are
        ignored) and stored in their canonical spelling.
        """
        lookup = {_canonical(n): n for n in STANDARD_64}
        if names is None:
            names = STANDARD_64
        canon = []
        for n in names:
            key = _canonical(n)
            canon.append(lookup.get(key, n.strip().strip(".")))
        pos = np.array([standard_position(n) for n in canon]) if canon else np.zeros((0, 3))
        if eye_proxies is None:
            eye_proxies = [e for e in _EYE_PROXIES if e in canon]
        return cls(tuple(canon), pos, tuple(eye_proxies))

    @property
    def n_channels(self) -> int:
        return len(self.channel_names)

    def index(self, name: str) -> int:
        return self.channel_names.index(name)

    def indices(self, names) -> list[int]:
        return [self.channel_names.index(n) for n in names]

    def subset(self, names: Sequence[str]) -> "Montage":
        idx = self.indices(names)
        eye = [e for e in self.eye_proxy_channels if e in names]
        return Montage(tuple(names), self.positions[idx], tuple(eye))

    def to_dict(self) -> dict:
        return {
            "channel_names": list(self.channel_names),
            "positions": self.positions.tolist(),
            "eye_proxy_channels": list(self.eye_proxy_channels),
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "Montage":
        return cls(tuple(d["channel_names"]), np.asarray(d["positions"], float), tuple(d["eye_proxy_channels"]))

    def __eq__(self, other):
        if not isinstance(other, Montage):
            return NotImplemented
        return (
            self.channel_names == other.channel_names
            and self.eye_proxy_channels == other.eye_proxy_channels
            and np.array_equal(self.positions, other.positions)
        )

    def __hash__(self):
        return hash((self.channel_names, self.eye_proxy_channels, self.positions.tobytes()))


@dataclass(frozen=True)
class Event:
    onset: int
    label: str
    duration: int = 0


@dataclass(frozen=True, eq=False)
class Recording:
    """Continuous multichannel EEG in microvolts (channels x samples)."""

    data: np.ndarray
    fs: float
    montage: Montage
    events: tuple[Event, ...] = ()
    subject_id: str = ""

    def __post_init__(self):
        object.__setattr__(self, "data", _frozen(np.atleast_2d(self.data)))
        object.__setattr__(self, "events", tuple(self.events))
        object.__setattr__(self, "fs", float(self.fs))

    @property
    def n_samples(self) -> int:
        return self.data.shape[1]

    @property
    def n_channels(self) -> int:
        return self.data.shape[0]


def validate_recording(r: Recording) -> list[str]:
    """One diagnostic string per violated Recording invariant (empty if valid)."""
    problems = []
    if r.data.ndim != 2 or r.data.shape[0] != r.montage.n_channels:
        problems.append(
            f"channel count mismatch: data has {r.data.shape[0]} rows, "
            f"montage has {r.montage.n_channels} channels"
        )
    if not r.fs > 0:
        problems.append(f"sampling rate must be positive, got {r.fs}")
    n = r.data.shape[-1]
    for ev in r.events:
        if not 0 <= ev.onset < n:
            problems.append(f"event out of range: {ev.label!r} at onset {ev.onset} (samples={n})")
        if ev.duration < 0:
            problems.append(f"negative event duration: {ev.label!r} duration {ev.duration}")
    return problems


@dataclass(frozen=True)
class LabelScheme:
    """Maps task labels to integer class ids."""

    mapping: Mapping[str, int]
    class_names: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "mapping", dict(self.mapping))
        object.__setattr__(self, "class_names", tuple(self.class_names))
        ids = set(self.mapping.values())
        if not ids <= set(range(len(self.class_names))):
            raise ValueError("class ids must index class_names")

    def class_of(self, label: str) -> int | None:
        return self.mapping.get(label)

    @property
    def n_classes(self) -> int:
        return len(self.class_names)


TWO_CLASS = LabelScheme({"Calm": 0, "Active": 1}, ("Calm", "Active"))
FOUR_CLASS = LabelScheme(
    {"LeftHand": 0, "RightHand": 1, "BothHands": 2, "BothLegs": 3},
    ("LeftHand", "RightHand", "BothHands", "BothLegs"),
)


@dataclass(frozen=True, eq=False)
class Epoch:
    data: np.ndarray
    class_id: int
    epoch_index: int
    fs: float


@dataclass(frozen=True, eq=False)
class Window:
    data: np.ndarray
    parent_epoch: int
    offset: int
    class_id: int


@dataclass(frozen=True, eq=False)
class EpochSet:
    """Equal-length epochs stacked as an (epochs, channels, samples) array."""

    data: np.ndarray
    class_ids: np.ndarray
    epoch_index: np.ndarray
    fs: float
    montage: Montage
    subject_id: str = ""
    class_names: tuple[str, ...] = field(default=())

    def __post_init__(self):
        data = np.asarray(self.data, dtype=float)
        if data.ndim != 3:
            raise ValueError("epoch data must be (epochs, channels, samples)")
        object.__setattr__(self, "data", _frozen(data))
        object.__setattr__(self, "class_ids", _frozen(self.class_ids, int))
        object.__setattr__(self, "epoch_index", _frozen(self.epoch_index, int))
        object.__setattr__(self, "fs", float(self.fs))
        if len(self.class_ids) != data.shape[0] or len(self.epoch_index) != data.shape[0]:
            raise ValueError("class_ids and epoch_index must have one entry per epoch")
        if data.shape[1] != self.montage.n_channels:
            raise ValueError("epoch channel count does not match montage")

    def __len__(self) -> int:
        return self.data.shape[0]

    def __iter__(self) -> Iterator[Epoch]:
        for i in range(len(self)):
            yield self.epoch(i)

    def epoch(self, i: int) -> Epoch:
        return Epoch(self.data[i], int(self.class_ids[i]), int(self.epoch_index[i]), self.fs)

    @property
    def n_samples(self) -> int:
        return self.data.shape[2]

    def select(self, idx) -> "EpochSet":
        idx = np.asarray(idx, dtype=int)
        return EpochSet(
            self.data[idx], self.class_ids[idx], self.epoch_index[idx],
            self.fs, self.montage, self.subject_id, self.class_names,
        )

    def with_data(self, data: np.ndarray) -> "EpochSet":
        return EpochSet(
            data, self.class_ids, self.epoch_index, self.fs,
            self.montage, self.subject_id, self.class_names,
        )

    def with_labels(self, class_ids) -> "EpochSet":
        return EpochSet(
            self.data, class_ids, self.epoch_index, self.fs,
            self.montage, self.subject_id, self.class_names,
        )
