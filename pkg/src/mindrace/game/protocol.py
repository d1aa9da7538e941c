"""One-byte command codes and the simulator configuration."""

from __future__ import annotations

import json
import logging
from dataclasses import asdict, dataclass, field

from ..core import Command

log = logging.getLogger(__name__)

DEFAULT_CODE_MAP = {0x01: Command.LEFT, 0x02: Command.RIGHT, 0x03: Command.LIGHT}


def decode_command(code: int, code_map=None) -> Command:
    """Byte value -> command; unknown codes decode to ``Command.INVALID``."""
    cmap = DEFAULT_CODE_MAP if code_map is None else code_map
    cmd = cmap.get(int(code))
    if cmd is None:
        log.info("invalid command byte 0x%02x", int(code) & 0xFF)
        return Command.INVALID
    return cmd


def encode_command(cmd: Command, code_map=None) -> bytes:
    cmap = DEFAULT_CODE_MAP if code_map is None else code_map
    for code, c in cmap.items():
        if c is cmd:
            return bytes([code])
    raise ValueError(f"command {cmd} has no byte code")


@dataclass(frozen=True)
class GameConfig:
    """Physics and transport settings; speeds in m/s, times in s."""

    v_max: float = 4.0
    v_slow: float = 1.0
    penalty_s: float = 2.0
    dt: float = 0.1
    track_length: float = 500.0
    time_limit_s: float = 240.0
    max_race_s: float = 3600.0
    base_port: int = 5555
    queue_size: int = 1024
    code_map: dict = field(default_factory=lambda: dict(DEFAULT_CODE_MAP))

    def __post_init__(self):
        if not (self.v_max > 0 and self.v_slow > 0):
            raise ValueError("speeds must be positive")
        if self.v_slow > self.v_max:
            raise ValueError("v_slow must not exceed v_max")
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.penalty_s < 0:
            raise ValueError("penalty_s must be >= 0")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["code_map"] = {str(k): v.value for k, v in self.code_map.items()}
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "GameConfig":
        d = dict(d)
        if "code_map" in d:
            d["code_map"] = {int(k, 0) if isinstance(k, str) else int(k): Command(v) for k, v in d["code_map"].items()}
        return cls(**d)

    @classmethod
    def load(cls, path) -> "GameConfig":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))
