from __future__ import annotations

import enum
import json
from dataclasses import dataclass

import numpy as np

from ..core import Command


class ZoneKind(enum.Enum):
    LEFT_TURN = "LeftTurn"
    RIGHT_TURN = "RightTurn"
    LIGHT = "Light"
    STRAIGHT = "Straight"

    @property
    def required(self) -> Command | None:
        """Command that satisfies the zone; ``None`` for straights."""
        return _REQUIRED[self]

    @property
    def is_turn(self) -> bool:
        return self in (ZoneKind.LEFT_TURN, ZoneKind.RIGHT_TURN)


_REQUIRED = {
    ZoneKind.LEFT_TURN: Command.LEFT,
    ZoneKind.RIGHT_TURN: Command.RIGHT,
    ZoneKind.LIGHT: Command.LIGHT,
    ZoneKind.STRAIGHT: None,
}

ZONES_PER_KIND = 4
_BATCH = 4096


@dataclass(frozen=True)
class Zone:
    kind: ZoneKind
    length: float

    def __post_init__(self):
        if not self.length > 0:
            raise ValueError("zone length must be positive")


@dataclass(frozen=True)
class Track:
    zones: tuple[Zone, ...]
    seed: int | None = None

    @property
    def total_length(self) -> float:
        return float(sum(z.length for z in self.zones))

    @property
    def boundaries(self) -> np.ndarray:
        """Cumulative end position of every zone."""
        return np.cumsum([z.length for z in self.zones])

    def kinds(self) -> tuple[ZoneKind, ...]:
        return tuple(z.kind for z in self.zones)

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "total_length": self.total_length,
            "zones": [{"kind": z.kind.value, "length": z.length} for z in self.zones],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Track":
        zones = tuple(Zone(ZoneKind(z["kind"]), float(z["length"])) for z in d["zones"])
        return cls(zones, d.get("seed"))

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2)

    @classmethod
    def load(cls, path) -> "Track":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def track_violations(kinds) -> list[str]:
    kinds = list(kinds)
    out = []
    for k in ZoneKind:
        n = kinds.count(k)
        if n != ZONES_PER_KIND:
            out.append(f"{n} zones of kind {k.value}, expected {ZONES_PER_KIND}")
    for i in range(len(kinds) - 1):
        if kinds[i].is_turn and kinds[i + 1].is_turn:
            out.append(f"turn zone {i} followed by turn zone {i + 1}")
    return out


def generate_track(seed: int = 0, total_length: float = 500.0) -> Track:
    """Random order of 4 zones per kind with no turn directly after a turn.

    Permutations are drawn uniformly and rejected until one satisfies the
    constraint, which keeps the result uniform over valid arrangements.
    """
    rng = np.random.default_rng(seed)
    order = list(ZoneKind)
    base = np.repeat(np.arange(len(order)), ZONES_PER_KIND)
    is_turn = np.array([k.is_turn for k in order])
    length = total_length / len(base)
    # draws are batched; taking the first valid row keeps the choice uniform
    while True:
        perms = rng.permuted(np.tile(base, (_BATCH, 1)), axis=1)
        turns = is_turn[perms]
        ok = np.flatnonzero(~np.any(turns[:, :-1] & turns[:, 1:], axis=1))
        if ok.size:
            kinds = [order[i] for i in perms[ok[0]]]
            return Track(tuple(Zone(k, length) for k in kinds), seed)
