from .loop import DecisionTick, LoopConfig, decision_loop, make_classifier, read_run_log, replay_commands, write_run_log
from .ring import RingBuffer, WarmingUp, ring_latest, ring_push
from .stream import ReplayStream, SampleStream, SocketStream, loopback_feed
from .toggle import ACTIVE, CALM, DEFAULT_CYCLE, ToggleSwitchState, toggle_step, toggle_trace

__all__ = [
    "DecisionTick", "LoopConfig", "decision_loop", "make_classifier", "read_run_log", "replay_commands",
    "write_run_log", "RingBuffer", "WarmingUp", "ring_latest", "ring_push", "ReplayStream", "SampleStream",
    "SocketStream", "loopback_feed", "ACTIVE", "CALM", "DEFAULT_CYCLE", "ToggleSwitchState", "toggle_step",
    "toggle_trace",
]
