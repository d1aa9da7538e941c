import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mindrace.core import Command
from mindrace.game import (
    GameConfig,
    QueueSource,
    RaceSession,
    SilentSource,
    TimedScript,
    Track,
    UdpCommandServer,
    UdpSender,
    Zone,
    ZoneKind,
    ZoneScript,
    decode_command,
    encode_command,
    generate_track,
    perfect_script,
    race_tick,
    run_race,
    track_violations,
    udp_serve,
)
from mindrace.game.race import RaceState

CFG = GameConfig()
ZONE = 500.0 / 16


# --- tracks -----------------------------------------------------------------------


def test_track_invariants_over_seeds():
    seen = set()
    for seed in range(1000):
        t = generate_track(seed)
        assert track_violations(t.kinds()) == []
        assert t.total_length == pytest.approx(500.0)
        seen.add(t.kinds())
    assert len(seen) >= 100


def test_track_is_deterministic():
    assert generate_track(7) == generate_track(7)
    assert generate_track(7) != generate_track(8)


def test_track_round_trip(tmp_path):
    t = generate_track(3)
    t.save(tmp_path / "t.json")
    assert Track.load(tmp_path / "t.json") == t


def test_track_violations_reports_problems():
    kinds = [ZoneKind.LEFT_TURN, ZoneKind.RIGHT_TURN] + [ZoneKind.STRAIGHT] * 14
    v = track_violations(kinds)
    assert any("followed by turn" in s for s in v)
    assert any("LeftTurn" in s for s in v)


def test_zone_length_must_be_positive():
    with pytest.raises(ValueError):
        Zone(ZoneKind.STRAIGHT, 0.0)


# --- protocol ------------------------------------------------------------------------


def test_decode_known_and_unknown_bytes():
    assert decode_command(0x01) is Command.LEFT
    assert decode_command(0x02) is Command.RIGHT
    assert decode_command(0x03) is Command.LIGHT
    assert decode_command(0xFF) is Command.INVALID


@pytest.mark.parametrize("cmd", [Command.LEFT, Command.RIGHT, Command.LIGHT])
def test_encode_decode_round_trip(cmd):
    b = encode_command(cmd)
    assert len(b) == 1 and decode_command(b[0]) is cmd


def test_encode_invalid_raises():
    with pytest.raises(ValueError):
        encode_command(Command.INVALID)


def test_game_config_validation_and_round_trip(tmp_path):
    with pytest.raises(ValueError):
        GameConfig(v_slow=5.0)
    with pytest.raises(ValueError):
        GameConfig(dt=0)
    cfg = GameConfig(v_max=5.0, code_map={0x10: Command.LEFT, 0x11: Command.RIGHT, 0x12: Command.LIGHT})
    (tmp_path / "g.json").write_text(json.dumps(cfg.to_dict()))
    assert GameConfig.load(tmp_path / "g.json") == cfg


# --- race physics ----------------------------------------------------------------------


def test_perfect_run_time():
    for seed in range(5):
        t = generate_track(seed)
        res = run_race(t, perfect_script(t))
        assert res.finish_time == pytest.approx(500.0 / CFG.v_max)
        assert res.finish_time <= 125.4 and res.passed


def test_silent_run_time():
    # 12 command zones at v_slow, 4 straights at v_max
    expected = 12 * ZONE / CFG.v_slow + 4 * ZONE / CFG.v_max
    res = run_race(generate_track(0), SilentSource())
    assert res.finish_time == pytest.approx(expected) == 406.25
    assert not res.passed


def test_command_spam_on_straight_runs_at_v_slow():
    t = Track(tuple(Zone(ZoneKind.STRAIGHT, 500.0 / 16) for _ in range(16)))
    # entering a zone clears the penalty, so the spam restarts at every entry
    spam = ZoneScript({i: [(0.5 * k, Command.LEFT) for k in range(80)] for i in range(16)})
    res = run_race(t, spam)
    assert res.finish_time == pytest.approx(500.0 / CFG.v_slow)


def test_penalty_window_length():
    # one command at t=0 on a straight: 2 s at v_slow, then v_max
    t = Track(tuple(Zone(ZoneKind.STRAIGHT, 500.0 / 16) for _ in range(16)))
    res = run_race(t, TimedScript([(0.0, Command.LIGHT)]))
    assert res.finish_time == pytest.approx(2.0 + (500.0 - 2.0 * CFG.v_slow) / CFG.v_max)


def test_wrong_command_keeps_v_slow():
    t = generate_track(1)
    plan = {i: [(0.0, Command.LIGHT if z.kind.is_turn else Command.LEFT)]
            for i, z in enumerate(t.zones) if z.kind.required}
    res = run_race(t, ZoneScript(plan))
    assert res.finish_time == pytest.approx(406.25)
    assert any(e.get("effect") == "wrong" for e in res.events)


def test_late_command_satisfies_rest_of_zone():
    t = generate_track(2)
    first = next(i for i, z in enumerate(t.zones) if z.kind.required)
    res = run_race(t, ZoneScript({first: [(3.0, t.zones[first].kind.required)]}))
    # 3 s at v_slow inside the zone, remainder at v_max
    remaining = ZONE - 3.0 * CFG.v_slow
    assert res.zone_times[first] == pytest.approx(3.0 + remaining / CFG.v_max)


def test_invalid_code_counts_as_wrong():
    t = generate_track(0)
    first = next(i for i, z in enumerate(t.zones) if z.kind.required)
    res = run_race(t, ZoneScript({first: [(0.0, Command.INVALID)]}))
    assert any(e.get("effect") == "wrong" for e in res.events)


def test_finish_time_not_tied_to_tick_grid():
    t = generate_track(0)
    res = run_race(t, perfect_script(t), GameConfig(dt=0.7))
    assert res.finish_time == pytest.approx(125.0)


def test_race_tick_is_pure():
    t = generate_track(0)
    s0 = RaceState()
    a, ev_a = race_tick(s0, t, CFG)
    b, ev_b = race_tick(s0, t, CFG)
    assert a == b and ev_a == ev_b and s0 == RaceState()


def test_race_is_deterministic():
    t = generate_track(4)
    script = TimedScript([(1.3 * i, [Command.LEFT, Command.RIGHT, Command.LIGHT][i % 3]) for i in range(200)])
    a = run_race(t, script)
    script2 = TimedScript([(1.3 * i, [Command.LEFT, Command.RIGHT, Command.LIGHT][i % 3]) for i in range(200)])
    b = run_race(t, script2)
    assert a.events == b.events and a.finish_time == b.finish_time


def test_track_length_mismatch():
    with pytest.raises(ValueError):
        RaceSession(generate_track(0, 400.0))


plans = st.dictionaries(
    st.integers(0, 15),
    st.lists(st.tuples(st.floats(0, 40), st.sampled_from([Command.LEFT, Command.RIGHT, Command.LIGHT])), max_size=3),
    max_size=10,
)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), plans, st.integers(0, 15))
def test_correct_entry_command_never_slows(seed, plan, zone):
    t = generate_track(seed)
    base = run_race(t, ZoneScript(plan)).finish_time
    req = t.zones[zone].kind.required
    if req is None:
        return
    better = dict(plan)
    better[zone] = [(0.0, req)] + list(plan.get(zone, []))
    assert run_race(t, ZoneScript(better)).finish_time <= base + 1e-9


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), plans, st.floats(0, 20))
def test_straight_command_never_speeds_up(seed, plan, delay):
    t = generate_track(seed)
    base = run_race(t, ZoneScript(plan)).finish_time
    straight = next(i for i, z in enumerate(t.zones) if z.kind is ZoneKind.STRAIGHT)
    worse = dict(plan)
    worse[straight] = list(plan.get(straight, [])) + [(delay, Command.LEFT)]
    assert run_race(t, ZoneScript(worse)).finish_time >= base - 1e-9


def test_zone_times_sum_to_finish():
    t = generate_track(5)
    res = run_race(t, perfect_script(t))
    assert len(res.zone_times) == 16
    assert sum(res.zone_times) == pytest.approx(res.finish_time)


# --- UDP transport ----------------------------------------------------------------------


def test_udp_loopback_in_order():
    with UdpCommandServer(0) as server:
        sender = UdpSender(server.port)
        codes = [1 + i % 3 for i in range(100)]
        for c in codes:
            sender.send(bytes([c]))
        assert server.wait_received(100, timeout=5.0)
        pkts = server.drain()
        sender.close()
    assert [p.code for p in pkts] == codes
    assert [p.seq for p in pkts] == list(range(100))


def test_udp_malformed_datagram_dropped():
    with UdpCommandServer(0) as server:
        sender = UdpSender(server.port)
        sender.send(b"\x01\x02")
        sender.send(b"\xff")
        assert server.wait_received(2)
        pkts = server.drain()
        sender.close()
    assert server.malformed == 1
    assert [p.command for p in pkts] == [Command.INVALID]


def test_queue_full_drops_without_blocking():
    server = UdpCommandServer(0, GameConfig(queue_size=2))
    try:
        for _ in range(5):
            server.handle_datagram(b"\x01")
        assert server.dropped == 3 and len(server.drain()) == 2
    finally:
        server.close()


def test_udp_serve_one_port_per_player():
    probe = UdpCommandServer(0)
    base = probe.port
    probe.close()
    try:
        servers = udp_serve(2, base_port=base)
    except OSError:
        pytest.skip("adjacent UDP ports unavailable")
    try:
        assert [s.port for s in servers.values()] == [base, base + 1]
    finally:
        for s in servers.values():
            s.close()


def test_port_in_use_raises():
    with UdpCommandServer(0) as a:
        with pytest.raises(OSError):
            UdpCommandServer(a.port)


def test_queue_source_drives_race_by_timestamp():
    t = generate_track(0)
    clock = [0.0]
    with UdpCommandServer(0, clock=lambda: clock[0]) as server:
        session = RaceSession(t, QueueSource(server))
        sender = UdpSender(server.port)
        for i, z in enumerate(t.zones):
            session.advance_to(i * ZONE / CFG.v_max)
            if z.kind.required:
                clock[0] = i * ZONE / CFG.v_max
                sender.send(encode_command(z.kind.required))
                assert server.wait_received(sender.sent)
        res = session.run()
        sender.close()
    assert res.finish_time == pytest.approx(125.0)
    assert np.allclose(res.zone_times, ZONE / CFG.v_max)
