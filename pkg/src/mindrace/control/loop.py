"""Real-time decision loop: every 1.6 s of stream time, classify the latest
1 s window and pass the Toggle Switch output to a packet sink."""

from __future__ import annotations

import json
import logging
import time
from dataclasses import dataclass, field

import numpy as np

from ..core import Command
from ..faster import FasterModel, faster_online_apply
from ..features import BandSpec, band_features, fft_abs_array
from ..game.protocol import DEFAULT_CODE_MAP, encode_command
from ..svm import VotingSvmModel, predict_voting_batch
from .ring import RingBuffer, WarmingUp
from .stream import SampleStream
from .toggle import ACTIVE, CALM, DEFAULT_CYCLE, ToggleSwitchState, toggle_step

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class LoopConfig:
    period_s: float = 1.6
    win_s: float = 1.0
    band: str = "range40"
    active_class: int = 1
    cycle: tuple[Command, ...] = DEFAULT_CYCLE
    # wall-clock latency makes run logs non-reproducible, so it is opt-in
    record_latency: bool = False
    check_channels: bool = True
    code_map: dict = field(default_factory=lambda: dict(DEFAULT_CODE_MAP))


@dataclass
class DecisionTick:
    tick: int
    time: float
    output: str | None
    command: str | None
    latency_ms: float | None = None
    skipped: str | None = None

    def to_json(self) -> str:
        d = {"tick": self.tick, "time": round(self.time, 6), "output": self.output, "command": self.command}
        if self.latency_ms is not None:
            d["latency_ms"] = round(self.latency_ms, 3)
        if self.skipped:
            d["skipped"] = self.skipped
        return json.dumps(d, sort_keys=True)


def make_classifier(model: FasterModel, clf: VotingSvmModel, fs: float, cfg: LoopConfig):
    """Window (channels, W) -> class id, via online FASTER, FFT and the voting SVM."""
    band = BandSpec.named(cfg.band)
    n_bins = len(band.edges())
    if clf.n_units != n_bins:
        raise ValueError(f"classifier has {clf.n_units} units, band {cfg.band} has {n_bins} bins")

    def classify(window: np.ndarray) -> int:
        x = faster_online_apply(model, window, check_channels=cfg.check_channels)
        mag = fft_abs_array(x[None])
        F = band_features(mag, fs / x.shape[-1], band)
        return int(predict_voting_batch(clf, F)[0])

    return classify


def decision_loop(
    stream: SampleStream,
    model: FasterModel | None,
    clf: VotingSvmModel | None,
    cfg: LoopConfig | None = None,
    sink=None,
    classify=None,
    on_tick=None,
) -> list[DecisionTick]:
    """Run until the stream ends; returns the run log.

    ``sink(payload, time)`` receives the byte encoding of each command.
    ``classify`` replaces the model pipeline (window -> class id), e.g. with a
    scripted stub. ``on_tick(tick)`` is called after every tick.
    Chunks are split at tick boundaries, so results do not depend on chunk size.
    """
    cfg = cfg or LoopConfig()
    fs = stream.fs
    W = int(round(cfg.win_s * fs))
    if classify is None:
        if model is None or clf is None:
            raise ValueError("either classify or both model and clf are required")
        if model.montage.n_channels != stream.n_channels:
            raise ValueError(f"model expects {model.montage.n_channels} channels, stream has {stream.n_channels}")
        if model.fs and abs(model.fs - fs) > 1e-9:
            raise ValueError(f"model was calibrated at {model.fs} Hz, stream runs at {fs} Hz")
        classify = make_classifier(model, clf, fs, cfg)
    ring = RingBuffer(stream.n_channels, max(W, int(round(cfg.period_s * fs))) + 1)
    state = ToggleSwitchState(tuple(cfg.cycle))
    log_ticks: list[DecisionTick] = []
    k = 1
    boundary = int(round(k * cfg.period_s * fs))
    while True:
        chunk = stream.read()
        if chunk is None:
            break
        chunk = np.asarray(chunk, dtype=float)
        while chunk.shape[1]:
            take = min(chunk.shape[1], boundary - ring.total)
            ring.push(chunk[:, :take])
            chunk = chunk[:, take:]
            if ring.total < boundary:
                continue
            t = boundary / fs
            tick = DecisionTick(k, t, None, None)
            t0 = time.perf_counter()
            try:
                window = ring.latest(W)
            except WarmingUp as e:
                tick.skipped = str(e)
                log.info("tick %d skipped: %s", k, e)
            else:
                cls = classify(window)
                tick.output = ACTIVE if cls == cfg.active_class else CALM
                state, cmd = toggle_step(state, tick.output)
                if cmd is not None:
                    tick.command = cmd.value
                    if sink is not None:
                        sink(encode_command(cmd, cfg.code_map), t)
            if cfg.record_latency:
                tick.latency_ms = (time.perf_counter() - t0) * 1e3
            log_ticks.append(tick)
            if on_tick is not None:
                on_tick(tick)
            k += 1
            boundary = int(round(k * cfg.period_s * fs))
    return log_ticks


def write_run_log(ticks, path) -> None:
    with open(path, "w") as fh:
        for t in ticks:
            fh.write(t.to_json() + "\n")


def read_run_log(path) -> list[dict]:
    with open(path) as fh:
        return [json.loads(line) for line in fh if line.strip()]


def replay_commands(entries, cycle=DEFAULT_CYCLE) -> list[str | None]:
    """Re-derive the command sequence from the logged classifier outputs."""
    state = ToggleSwitchState(tuple(cycle))
    out = []
    for e in entries:
        if e.get("output") is None:
            out.append(None)
            continue
        state, cmd = toggle_step(state, e["output"])
        out.append(cmd.value if cmd else None)
    return out
