"""Toggle Switch: Active steps through the command cycle, Calm sends nothing."""

from __future__ import annotations

from dataclasses import dataclass, replace

from ..core import Command

DEFAULT_CYCLE = (Command.LEFT, Command.RIGHT, Command.LIGHT)
ACTIVE = "Active"
CALM = "Calm"


@dataclass(frozen=True)
class ToggleSwitchState:
    cycle: tuple[Command, ...] = DEFAULT_CYCLE
    pointer: int = -1  # -1 before the first Active
    last_emitted: tuple[Command, int] | None = None
    ticks: int = 0

    def __post_init__(self):
        if not self.cycle:
            raise ValueError("command cycle must not be empty")
        if not -1 <= self.pointer < len(self.cycle):
            raise ValueError(f"pointer {self.pointer} outside the cycle")


def as_output(cls_output) -> str:
    """Accept "Active"/"Calm" or the two-class ids (1 Active, 0 Calm)."""
    if cls_output in (ACTIVE, 1, True):
        return ACTIVE
    if cls_output in (CALM, 0, False):
        return CALM
    raise ValueError(f"unknown classifier output {cls_output!r}")


def toggle_step(state: ToggleSwitchState, cls_output) -> tuple[ToggleSwitchState, Command | None]:
    out = as_output(cls_output)
    tick = state.ticks
    if out == CALM:
        return replace(state, ticks=tick + 1), None
    pointer = (state.pointer + 1) % len(state.cycle)
    cmd = state.cycle[pointer]
    return replace(state, pointer=pointer, last_emitted=(cmd, tick), ticks=tick + 1), cmd


def toggle_trace(outputs, cycle=DEFAULT_CYCLE) -> list[Command | None]:
    state = ToggleSwitchState(tuple(cycle))
    emitted = []
    for o in outputs:
        state, cmd = toggle_step(state, o)
        emitted.append(cmd)
    return emitted
