"""Closed loop: decision loop -> UDP -> race session, all on stream time."""

from __future__ import annotations

import logging
from dataclasses import dataclass

from .control import LoopConfig, ToggleSwitchState, decision_loop, toggle_step
from .control.toggle import ACTIVE, CALM
from .game import GameConfig, QueueSource, RaceResult, RaceSession, Track, UdpCommandServer, UdpSender
from .game.race import CommandSource, TimedCommand
from .game.track import ZoneKind

log = logging.getLogger(__name__)


class _AppendSource(CommandSource):
    def __init__(self):
        self.items: list[TimedCommand] = []
        self._pos = 0

    def commands_before(self, t_end):
        out = []
        while self._pos < len(self.items) and self.items[self._pos].time < t_end:
            out.append(self.items[self._pos])
            self._pos += 1
        return out


def plan_steering(track: Track, game_cfg: GameConfig | None = None, loop_cfg: LoopConfig | None = None,
                  max_ticks: int = 1000) -> list[str]:
    """Classifier outputs that steer the Toggle Switch through ``track``.

    At each decision time the plan says Active while the avatar sits in an
    unsatisfied turn or light zone. Inside an already satisfied zone, where
    commands have no effect, it keeps saying Active until the next emission
    would be the command the following turn or light zone needs. Straight
    zones are always Calm. Outputs are assumed to be classified correctly.
    """
    game_cfg = game_cfg or GameConfig()
    loop_cfg = loop_cfg or LoopConfig()
    src = _AppendSource()
    session = RaceSession(track, src, game_cfg)
    toggle = ToggleSwitchState(tuple(loop_cfg.cycle))
    plan: list[str] = []
    for k in range(1, max_ticks + 1):
        t = k * loop_cfg.period_s
        session.advance_to(t)
        if session.finished:
            break
        st = session.state
        kind = track.zones[st.zone_index].kind
        if kind is ZoneKind.STRAIGHT:
            out = CALM
        elif not st.satisfied:
            out = ACTIVE
        else:
            upcoming = _next_required(track, st.zone_index)
            nxt = toggle.cycle[(toggle.pointer + 1) % len(toggle.cycle)]
            out = ACTIVE if upcoming is not None and nxt is not upcoming else CALM
        toggle, cmd = toggle_step(toggle, out)
        if cmd is not None:
            src.items.append(TimedCommand(t, k, cmd))
        plan.append(out)
    return plan


def _next_required(track: Track, zone: int):
    for z in track.zones[zone + 1 :]:
        if z.kind.required is not None:
            return z.kind.required
    return None


def plan_to_blocks(plan, active_class: int = 1, calm_class: int = 0, tail: int = 10) -> list[int]:
    """Block class ids for a scripted stream: block k ends at decision tick k + 1."""
    ids = [active_class if p == ACTIVE else calm_class for p in plan]
    return ids + [calm_class] * tail


@dataclass
class ClosedLoopResult:
    race: RaceResult
    ticks: list
    packets_sent: int
    malformed: int


def run_closed_loop(stream, model, clf, track: Track, game_cfg: GameConfig | None = None,
                    loop_cfg: LoopConfig | None = None, port: int = 0, classify=None) -> ClosedLoopResult:
    """Play a race with commands produced by the decision loop over ``stream``.

    Packets travel over loopback UDP and are stamped with the stream time of
    the tick that produced them; the sink waits until the server has seen each
    packet, so the outcome does not depend on thread scheduling. The race
    keeps running after the stream ends until the avatar finishes.
    """
    game_cfg = game_cfg or GameConfig()
    loop_cfg = loop_cfg or LoopConfig()
    now = [0.0]
    server = UdpCommandServer(port, game_cfg, clock=lambda: now[0]).start()
    sender = UdpSender(server.port)
    try:
        session = RaceSession(track, QueueSource(server), game_cfg)

        def sink(payload: bytes, t: float) -> None:
            now[0] = t
            sender.send(payload)
            if not server.wait_received(sender.sent, timeout=5.0):
                raise RuntimeError("game server did not receive a command packet")

        ticks = decision_loop(stream, model, clf, loop_cfg, sink=sink, classify=classify,
                              on_tick=lambda tick: session.advance_to(tick.time))
        race = session.run()
        return ClosedLoopResult(race, ticks, sender.sent, server.malformed)
    finally:
        sender.close()
        server.close()
