from .protocol import DEFAULT_CODE_MAP, GameConfig, decode_command, encode_command
from .race import (
    CommandSource,
    RaceResult,
    RaceSession,
    RaceState,
    SilentSource,
    TimedCommand,
    TimedScript,
    ZoneScript,
    perfect_script,
    race_tick,
    run_race,
)
from .track import Track, Zone, ZoneKind, generate_track, track_violations
from .udp import CommandPacket, QueueSource, UdpCommandServer, UdpSender, udp_serve

__all__ = [
    "DEFAULT_CODE_MAP", "GameConfig", "decode_command", "encode_command",
    "CommandSource", "RaceResult", "RaceSession", "RaceState", "SilentSource", "TimedCommand",
    "TimedScript", "ZoneScript", "perfect_script", "race_tick", "run_race",
    "Track", "Zone", "ZoneKind", "generate_track", "track_violations",
    "CommandPacket", "QueueSource", "UdpCommandServer", "UdpSender", "udp_serve",
]
