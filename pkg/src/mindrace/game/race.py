"""Deterministic race model.

Inside a tick, commands take effect at their own timestamps and zone
boundaries are crossed at the exact time the avatar reaches them, so a run is
a function of (track, config, timestamped commands) only and does not depend
on where tick boundaries fall.
"""

from __future__ import annotations

import heapq
import json
import math
from dataclasses import dataclass, field, replace
from typing import Iterable

from ..core import Command
from .protocol import GameConfig
from .track import Track, ZoneKind

_EPS = 1e-9


@dataclass(frozen=True)
class RaceState:
    position: float = 0.0
    speed: float = 0.0
    clock: float = 0.0
    tick: int = 0
    zone_index: int = 0
    satisfied: bool = False
    penalty_until: float = -math.inf
    finish_time: float | None = None
    # scheduled commands that fall after the current tick
    pending: tuple = ()

    @property
    def finished(self) -> bool:
        return self.finish_time is not None


@dataclass(frozen=True, order=True)
class TimedCommand:
    """A command arriving at ``time``. With ``zone`` set it only counts while the
    avatar is still in that zone (zone-relative scripts)."""

    time: float
    seq: int
    command: Command = field(compare=False)
    zone: int | None = field(default=None, compare=False)


def zone_speed(state: RaceState, kind: ZoneKind, cfg: GameConfig) -> float:
    if kind is ZoneKind.STRAIGHT:
        return cfg.v_slow if state.clock < state.penalty_until - _EPS else cfg.v_max
    return cfg.v_max if state.satisfied else cfg.v_slow


def _r(x: float) -> float:
    return round(float(x), 9)


def race_tick(state: RaceState, track: Track, cfg: GameConfig, commands=(), on_enter=None):
    """Advance one tick of ``cfg.dt``.

    ``commands`` are ``TimedCommand`` (or ``(time, Command)``) items for this
    tick; items stamped before the tick start apply at its start.
    ``on_enter(zone_index, kind, time)`` may return further commands, which
    lets zone-relative scripts react to a zone entry inside the tick.
    Returns ``(new_state, events)``.
    """
    if state.finished:
        return state, []
    events: list[dict] = []
    queue: list[TimedCommand] = list(state.pending)
    heapq.heapify(queue)
    for i, c in enumerate(commands):
        if not isinstance(c, TimedCommand):
            c = TimedCommand(float(c[0]), i, c[1])
        heapq.heappush(queue, c)
    zones = track.zones
    ends = track.boundaries
    s = state
    t_end = (s.tick + 1) * cfg.dt
    if s.tick == 0 and s.clock == 0.0 and s.speed == 0.0:
        s = replace(s, speed=zone_speed(s, zones[0].kind, cfg))
        events.append({"t": 0.0, "event": "zone_enter", "zone": 0, "kind": zones[0].kind.value})
        events.append({"t": 0.0, "event": "speed", "speed": s.speed})
        if on_enter is not None:
            for c in on_enter(0, zones[0].kind, 0.0) or ():
                heapq.heappush(queue, c)
    seq = 10**6
    while True:
        kind = zones[s.zone_index].kind
        v = zone_speed(s, kind, cfg)
        if v != s.speed:
            s = replace(s, speed=v)
            events.append({"t": _r(s.clock), "event": "speed", "speed": v})
        t_cmd = max(queue[0].time, s.clock) if queue else math.inf
        t_bound = s.clock + (ends[s.zone_index] - s.position) / v
        t_pen = s.penalty_until if kind is ZoneKind.STRAIGHT and s.penalty_until > s.clock + _EPS else math.inf
        t_next = min(t_end, t_cmd, t_bound, t_pen)
        if t_next == t_bound:
            pos = float(ends[s.zone_index])
        else:
            pos = s.position + v * (t_next - s.clock)
        s = replace(s, position=pos, clock=t_next)
        if t_next == t_bound:
            nxt = s.zone_index + 1
            if nxt >= len(zones):
                s = replace(s, finish_time=t_next, clock=t_next)
                events.append({"t": _r(t_next), "event": "finish"})
                break
            s = replace(s, zone_index=nxt, satisfied=False, penalty_until=-math.inf)
            events.append({"t": _r(t_next), "event": "zone_enter", "zone": nxt, "kind": zones[nxt].kind.value})
            if on_enter is not None:
                for c in on_enter(nxt, zones[nxt].kind, t_next) or ():
                    seq += 1
                    heapq.heappush(queue, c if isinstance(c, TimedCommand) else TimedCommand(float(c[0]), seq, c[1]))
            continue
        if t_next == t_cmd:
            c = heapq.heappop(queue)
            s, ev = _apply_command(s, kind, c, cfg)
            events.append(ev)
            continue
        if t_next == t_pen:
            continue
        break
    if not s.finished:
        s = replace(s, clock=t_end, pending=tuple(sorted(queue)))
    else:
        s = replace(s, pending=())
    s = replace(s, tick=s.tick + 1)
    return s, events


def _apply_command(s: RaceState, kind: ZoneKind, c: TimedCommand, cfg: GameConfig):
    ev = {"t": _r(s.clock), "event": "command", "command": c.command.value, "zone": s.zone_index}
    if c.zone is not None and c.zone != s.zone_index:
        ev["effect"] = "expired"
        return s, ev
    if kind is ZoneKind.STRAIGHT:
        ev["effect"] = "penalty"
        return replace(s, penalty_until=s.clock + cfg.penalty_s), ev
    if not s.satisfied and c.command is kind.required:
        ev["effect"] = "satisfied"
        return replace(s, satisfied=True), ev
    ev["effect"] = "ignored" if s.satisfied else "wrong"
    return s, ev


# --- command sources ---------------------------------------------------------


class CommandSource:
    """Supplies commands to ``run_race``; subclasses override either hook."""

    def commands_before(self, t_end: float) -> list:
        """Commands stamped before ``t_end`` not yet delivered."""
        return []

    def on_enter(self, zone: int, kind: ZoneKind, t: float) -> list:
        return []


class SilentSource(CommandSource):
    pass


class TimedScript(CommandSource):
    """Fixed list of ``(time, Command)`` pairs."""

    def __init__(self, items: Iterable):
        self._items = sorted((float(t), i, c) for i, (t, c) in enumerate(items))
        self._pos = 0

    def commands_before(self, t_end):
        out = []
        while self._pos < len(self._items) and self._items[self._pos][0] < t_end:
            t, i, c = self._items[self._pos]
            out.append(TimedCommand(t, i, c))
            self._pos += 1
        return out


class ZoneScript(CommandSource):
    """Commands given per zone as ``(delay after entry, Command)`` pairs; a
    command whose time comes after the zone is left has no effect."""

    def __init__(self, plan: dict):
        self.plan = {int(k): list(v) for k, v in plan.items()}
        self._seq = 0

    def on_enter(self, zone, kind, t):
        out = []
        for delay, cmd in self.plan.get(zone, ()):
            self._seq += 1
            out.append(TimedCommand(t + float(delay), self._seq, cmd, zone))
        return out


def perfect_script(track: Track) -> ZoneScript:
    """The required command at the entry of every turn and light zone."""
    return ZoneScript({i: [(0.0, z.kind.required)] for i, z in enumerate(track.zones) if z.kind.required})


# --- full race ---------------------------------------------------------------


@dataclass
class RaceResult:
    finish_time: float | None
    events: list[dict]
    zone_times: list[float]
    time_limit_s: float
    ticks: int

    @property
    def passed(self) -> bool:
        return bool(self.finish_time is not None and self.finish_time <= self.time_limit_s)

    def summary(self) -> dict:
        return {
            "finish_time_s": None if self.finish_time is None else _r(float(self.finish_time)),
            "passed": self.passed,
            "time_limit_s": self.time_limit_s,
            "zone_times_s": [_r(z) for z in self.zone_times],
            "ticks": self.ticks,
        }

    def write_events(self, path) -> None:
        with open(path, "w") as fh:
            for e in self.events:
                fh.write(json.dumps(e, sort_keys=True) + "\n")


def zone_times(events: list[dict], n_zones: int) -> list[float]:
    starts = {e["zone"]: e["t"] for e in events if e["event"] == "zone_enter"}
    finish = next((e["t"] for e in events if e["event"] == "finish"), None)
    out = []
    for i in range(n_zones):
        end = starts.get(i + 1, finish if i == n_zones - 1 else None)
        if i in starts and end is not None:
            out.append(end - starts[i])
    return out


class RaceSession:
    """Tick-by-tick race driven by a command source; the only mutator of its state."""

    def __init__(self, track: Track, source: CommandSource | None = None, cfg: GameConfig | None = None):
        self.track = track
        self.cfg = cfg or GameConfig()
        self.source = source or SilentSource()
        self.state = RaceState()
        self.events: list[dict] = []
        if abs(track.total_length - self.cfg.track_length) > 1e-6:
            raise ValueError(f"track is {track.total_length} m, config expects {self.cfg.track_length} m")

    @property
    def finished(self) -> bool:
        return self.state.finished

    def step(self) -> None:
        t_end = (self.state.tick + 1) * self.cfg.dt
        cmds = self.source.commands_before(t_end)
        self.state, ev = race_tick(self.state, self.track, self.cfg, cmds, self.source.on_enter)
        self.events.extend(ev)

    def advance_to(self, t: float) -> None:
        """Run every tick that ends at or before ``t``."""
        while not self.finished and (self.state.tick + 1) * self.cfg.dt <= t + _EPS:
            self.step()

    def run(self) -> RaceResult:
        limit = int(math.ceil(self.cfg.max_race_s / self.cfg.dt))
        while not self.finished and self.state.tick < limit:
            self.step()
        return self.result()

    def result(self) -> RaceResult:
        return RaceResult(
            self.state.finish_time, list(self.events),
            zone_times(self.events, len(self.track.zones)), self.cfg.time_limit_s, self.state.tick,
        )


def run_race(track: Track, source: CommandSource | None = None, cfg: GameConfig | None = None) -> RaceResult:
    return RaceSession(track, source, cfg).run()
