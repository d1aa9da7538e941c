import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mindrace.control import (
    ACTIVE,
    CALM,
    LoopConfig,
    ReplayStream,
    RingBuffer,
    ToggleSwitchState,
    WarmingUp,
    decision_loop,
    loopback_feed,
    read_run_log,
    replay_commands,
    toggle_step,
    toggle_trace,
    write_run_log,
)
from mindrace.core import Command

FS = 100.0


# --- toggle switch -------------------------------------------------------------


def test_toggle_example_sequence():
    assert toggle_trace([ACTIVE, ACTIVE, CALM, ACTIVE]) == [Command.LEFT, Command.RIGHT, None, Command.LIGHT]


def test_toggle_all_calm_emits_nothing():
    assert toggle_trace([CALM] * 50) == [None] * 50


def test_toggle_accepts_class_ids():
    assert toggle_trace([1, 0, 1]) == [Command.LEFT, None, Command.RIGHT]


def test_toggle_rejects_unknown_output():
    with pytest.raises(ValueError):
        toggle_step(ToggleSwitchState(), "Maybe")


def test_toggle_rejects_empty_cycle():
    with pytest.raises(ValueError):
        ToggleSwitchState(cycle=())


@given(st.lists(st.booleans(), max_size=60))
def test_toggle_emits_cycle_in_order(flags):
    trace = toggle_trace([ACTIVE if f else CALM for f in flags])
    emitted = [c for c in trace if c is not None]
    assert len(emitted) == sum(flags)
    cycle = itertools.cycle([Command.LEFT, Command.RIGHT, Command.LIGHT])
    assert emitted == [next(cycle) for _ in emitted]
    assert all((c is None) == (not f) for c, f in zip(trace, flags))


def test_toggle_state_is_not_mutated():
    s0 = ToggleSwitchState()
    s1, _ = toggle_step(s0, ACTIVE)
    assert s0.pointer == -1 and s1.pointer == 0 and s1.last_emitted == (Command.LEFT, 0)


# --- ring buffer -----------------------------------------------------------------


@settings(max_examples=60, deadline=None)
@given(
    st.integers(1, 40),
    st.lists(st.integers(0, 30), min_size=1, max_size=12),
    st.integers(1, 40),
)
def test_ring_matches_naive_buffer(capacity, chunk_sizes, n):
    n = min(n, capacity)
    ring = RingBuffer(2, capacity)
    naive = np.zeros((2, 0))
    counter = 0
    for m in chunk_sizes:
        x = np.arange(counter, counter + m, dtype=float)[None].repeat(2, 0) * [[1], [-1]]
        counter += m
        ring.push(x)
        naive = np.concatenate([naive, x], axis=1)
        if naive.shape[1] >= n:
            np.testing.assert_array_equal(ring.latest(n), naive[:, -n:])
        else:
            with pytest.raises(WarmingUp):
                ring.latest(n)
    assert ring.total == naive.shape[1]


def test_ring_rejects_bad_shapes():
    ring = RingBuffer(3, 10)
    with pytest.raises(ValueError):
        ring.push(np.zeros((2, 4)))
    with pytest.raises(ValueError):
        ring.latest(11)
    with pytest.raises(ValueError):
        RingBuffer(0, 5)


# --- decision loop -----------------------------------------------------------------


def scripted_classifier(outputs):
    """Stub classifier: returns the next scripted class id on every call."""
    it = iter(outputs)
    return lambda window: next(it)


def run_stub(outputs, n_samples=None, chunk=None, sink=None):
    n_ticks = len(outputs)
    n_samples = n_samples or int(round(n_ticks * 1.6 * FS)) + 5
    stream = ReplayStream(np.zeros((2, n_samples)), FS, chunk=chunk)
    return decision_loop(stream, None, None, LoopConfig(), sink=sink, classify=scripted_classifier(outputs))


def test_all_calm_sends_no_packets():
    sent = []
    ticks = run_stub([0] * 20, sink=lambda p, t: sent.append((p, t)))
    assert len(ticks) == 20 and sent == []
    assert all(t.output == CALM and t.command is None for t in ticks)


def test_loop_trace_equals_toggle_trace():
    outputs = [1, 1, 0, 1, 0, 0, 1, 1, 1, 0]
    sent = []
    ticks = run_stub(outputs, sink=lambda p, t: sent.append((p, t)))
    expected = toggle_trace(outputs)
    assert [t.command for t in ticks] == [c.value if c else None for c in expected]
    assert [p for p, _ in sent] == [bytes([{"Left": 1, "Right": 2, "Light": 3}[c.value]]) for c in expected if c]
    assert [t for _, t in sent] == [pytest.approx(1.6 * (i + 1)) for i, c in enumerate(expected) if c]


def test_ticks_fall_every_period():
    ticks = run_stub([0] * 5)
    assert [t.time for t in ticks] == pytest.approx([1.6, 3.2, 4.8, 6.4, 8.0])


@pytest.mark.parametrize("chunk", [1, 7, 64, 1000])
def test_loop_does_not_depend_on_chunk_size(chunk):
    rng = np.random.default_rng(3)
    data = rng.normal(size=(3, 2000))
    seen = []

    def classify(window):
        seen.append(window.copy())
        return int(window[0, -1] > 0)

    ticks = decision_loop(ReplayStream(data, FS, chunk=chunk), None, None, classify=classify)
    ref = [int(data[0, int(round(k * 160)) - 1] > 0) for k in range(1, len(ticks) + 1)]
    assert [t.output == ACTIVE for t in ticks] == [bool(r) for r in ref]
    for k, w in enumerate(seen, start=1):
        end = int(round(k * 160))
        np.testing.assert_array_equal(w, data[:, end - 100 : end])


def test_warming_up_tick_is_skipped():
    # a 1 s window longer than the first period
    cfg = LoopConfig(period_s=0.5)
    ticks = decision_loop(ReplayStream(np.zeros((1, 300)), FS), None, None, cfg, classify=lambda w: 1)
    assert ticks[0].skipped and ticks[0].output is None
    assert ticks[1].output == ACTIVE and ticks[1].command == "Left"


def test_run_log_replays_commands(tmp_path):
    outputs = [1, 0, 1, 1, 0, 1, 1]
    ticks = run_stub(outputs)
    write_run_log(ticks, tmp_path / "log.jsonl")
    entries = read_run_log(tmp_path / "log.jsonl")
    assert replay_commands(entries) == [t.command for t in ticks]
    assert all("latency_ms" not in e for e in entries)


def test_run_log_is_byte_identical(tmp_path):
    outputs = [1, 0, 1, 1, 0]
    write_run_log(run_stub(outputs), tmp_path / "a.jsonl")
    write_run_log(run_stub(outputs), tmp_path / "b.jsonl")
    assert (tmp_path / "a.jsonl").read_bytes() == (tmp_path / "b.jsonl").read_bytes()


def test_latency_recorded_when_requested():
    cfg = LoopConfig(record_latency=True)
    ticks = decision_loop(ReplayStream(np.zeros((1, 400)), FS), None, None, cfg, classify=lambda w: 0)
    assert all(t.latency_ms is not None and t.latency_ms >= 0 for t in ticks)


def test_loop_requires_models_or_classifier():
    with pytest.raises(ValueError):
        decision_loop(ReplayStream(np.zeros((1, 10)), FS), None, None)


def test_model_channel_mismatch(trained):
    model, clf = trained
    with pytest.raises(ValueError, match="channels"):
        decision_loop(ReplayStream(np.zeros((3, 400)), model.fs), model, clf)


def test_loop_with_trained_models(trained, two_class_rec):
    model, clf = trained
    ticks = decision_loop(ReplayStream(two_class_rec.data[:, : int(8 * two_class_rec.fs)], two_class_rec.fs),
                          model, clf)
    assert len(ticks) == 5 and all(t.output in (ACTIVE, CALM) for t in ticks)


# --- streams -------------------------------------------------------------------------


def test_replay_stream_chunks_cover_data():
    data = np.arange(23.0)[None]
    s = ReplayStream(data, FS, chunk=5)
    parts = []
    while (c := s.read()) is not None:
        parts.append(c)
    assert [p.shape[1] for p in parts] == [5, 5, 5, 5, 3]
    np.testing.assert_array_equal(np.concatenate(parts, axis=1), data)


def test_replay_stream_rejects_1d():
    with pytest.raises(ValueError):
        ReplayStream(np.zeros(10), FS)


def test_loopback_socket_matches_replay():
    rng = np.random.default_rng(0)
    data = rng.normal(size=(4, 777)).astype(np.float32).astype(float)
    sock_stream, th = loopback_feed(ReplayStream(data, FS, chunk=50))
    parts = []
    while (c := sock_stream.read()) is not None:
        parts.append(c)
    th.join(timeout=2)
    sock_stream.close()
    np.testing.assert_array_equal(np.concatenate(parts, axis=1), data)


def test_socket_and_replay_runs_agree():
    rng = np.random.default_rng(1)
    data = rng.normal(size=(2, 1200)).astype(np.float32).astype(float)
    classify = lambda w: int(w.mean() > 0)  # noqa: E731
    a = decision_loop(ReplayStream(data, FS), None, None, classify=classify)
    sock_stream, _ = loopback_feed(ReplayStream(data, FS, chunk=33))
    b = decision_loop(sock_stream, None, None, classify=classify)
    assert [t.to_json() for t in a] == [t.to_json() for t in b]
