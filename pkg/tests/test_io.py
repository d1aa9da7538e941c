import logging
import struct

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from mindrace.core import FOUR_CLASS, TWO_CLASS, Event, Montage, Recording
from mindrace.features import band_average, fft_abs_array
from mindrace.io import (
    ContainerError, EdfError, SynthConfig, concat_epochsets, epochs_from_events, excluded_subjects,
    parse_run_filename, physionet_class_map, read_container, read_edf, relabel_physionet,
    synthesize, synthesize_blocks, two_class_config, write_container, write_edf,
)
from mindrace.io.synth import BandModulation, ClassSpec, validate_config
from conftest import tiny_recording


# --- container ---------------------------------------------------------------

def test_container_round_trip_is_bit_exact_for_float32(tmp_path):
    r = tiny_recording(2, 100, events=[Event(5, "Active", 3)])
    write_container(r, tmp_path / "r.mrc")
    back = read_container(tmp_path / "r.mrc")
    np.testing.assert_array_equal(back.data, r.data.astype(np.float32))
    assert back.events == r.events and back.montage == r.montage and back.fs == r.fs


def test_container_without_events_and_with_63_channels(tmp_path):
    names = [n for n in Montage.standard().channel_names if n != "Iz"]
    r = Recording(np.zeros((63, 10)), 160.0, Montage.standard(names))
    write_container(r, tmp_path / "r.mrc")
    from mindrace.io import read_blob

    header, _ = read_blob(tmp_path / "r.mrc")
    assert header["events"] == [] and header["n_channels"] == 63


@settings(max_examples=30, deadline=None)
@given(arrays(np.float64, (3, 40), elements=st.floats(-500, 500)))
def test_int16_round_trip_within_one_step(tmp_path_factory, x):
    r = Recording(x, 100.0, Montage.standard(["C3", "Cz", "C4"]))
    p = tmp_path_factory.mktemp("c") / "r.mrc"
    write_container(r, p, encoding="int16")
    step = max(np.abs(x).max() / 32767.0, 1e-300)
    assert np.all(np.abs(read_container(p).data - x) <= step * (0.5 + 1e-9))


def test_bad_magic_is_rejected(tmp_path):
    p = tmp_path / "x.mrc"
    p.write_bytes(b"XXXX" + b"\0" * 20)
    with pytest.raises(ContainerError):
        read_container(p)


def test_truncated_payload_is_corrupt(tmp_path):
    r = tiny_recording(8, 20)
    p = tmp_path / "r.mrc"
    write_container(r, p)
    raw = p.read_bytes()
    p.write_bytes(raw[: -4 * 20])  # drop one channel's samples
    with pytest.raises(ContainerError, match="corrupt"):
        read_container(p)


def test_extra_header_is_stored(tmp_path):
    from mindrace.io import read_blob

    write_container(tiny_recording(), tmp_path / "r.mrc", extra={"seed": 7})
    assert read_blob(tmp_path / "r.mrc")[0]["extra"] == {"seed": 7}


# --- EDF -----------------------------------------------------------------------

def _edf_bytes(phys=(-1000.0, 1000.0), dig=(-32768, 32767), n_records=1, fs=4, value=0, annotation=None):
    """Hand-built EDF(+) file: one data signal plus an optional annotation signal."""
    signals = [("C3", phys, dig, fs)]
    if annotation is not None:
        signals.append(("EDF Annotations", (-1.0, 1.0), (-32768, 32767), 30))
    ns = len(signals)

    def pad(s, w):
        return s.encode("ascii").ljust(w)

    head = pad("0", 8) + pad("X", 80) + pad("Y", 80) + pad("01.01.01", 8) + pad("00.00.00", 8)
    head += pad(str(256 * (ns + 1)), 8) + pad("EDF+C" if annotation else "", 44)
    head += pad(str(n_records), 8) + pad("1", 8) + pad(str(ns), 4)
    fields = [
        [pad(s[0], 16) for s in signals], [pad("", 80)] * ns, [pad("uV", 8)] * ns,
        [pad(f"{s[1][0]:g}", 8) for s in signals], [pad(f"{s[1][1]:g}", 8) for s in signals],
        [pad(str(s[2][0]), 8) for s in signals], [pad(str(s[2][1]), 8) for s in signals],
        [pad("", 80)] * ns, [pad(str(s[3]), 8) for s in signals], [pad("", 32)] * ns,
    ]
    for f in fields:
        head += b"".join(f)
    body = b""
    for k in range(n_records):
        body += struct.pack(f"<{fs}h", *([value] * fs))
        if annotation is not None:
            # the first record carries the annotation, later ones only their time stamp
            text = annotation if k == 0 else f"+{k}\x14\x14\x00"
            tal = text.encode("ascii").ljust(60, b"\0")
            body += tal
    return head + body


def test_edf_digital_zero_maps_through_linear_scale(tmp_path):
    p = tmp_path / "a.edf"
    p.write_bytes(_edf_bytes())
    r = read_edf(p)
    # hand computation: phys = pmin + (d - dmin) * (pmax - pmin) / (dmax - dmin)
    expected = -1000.0 + (0 - -32768) * 2000.0 / 65535.0
    assert expected == pytest.approx(0.0153, abs=1e-4)
    np.testing.assert_allclose(r.data[0], expected, rtol=0, atol=1e-9)


@pytest.mark.parametrize("d, phys", [(-32768, -1000.0), (32767, 1000.0)])
def test_edf_extremes_map_exactly(tmp_path, d, phys):
    p = tmp_path / "b.edf"
    p.write_bytes(_edf_bytes(value=d))
    assert read_edf(p).data[0, 0] == phys


def test_edf_annotation_becomes_event(tmp_path):
    p = tmp_path / "c.edf"
    p.write_bytes(_edf_bytes(fs=160, annotation="+0\x14\x14\x00+4.2\x14T1\x14\x00", n_records=6))
    r = read_edf(p)
    assert r.fs == 160.0
    assert [(e.onset, e.label) for e in r.events] == [(round(4.2 * 160), "T1")]


def test_edf_with_zero_records(tmp_path):
    p = tmp_path / "d.edf"
    p.write_bytes(_edf_bytes(n_records=0))
    assert read_edf(p).n_samples == 0


def test_edf_writer_round_trip(tmp_path):
    x = np.random.default_rng(0).normal(scale=50, size=(3, 320))
    p = tmp_path / "w.edf"
    write_edf(p, x, 160.0, ["C3", "Cz", "C4"], annotations=[(0.5, 4.0, "T1"), (1.0, 0.0, "T2")])
    r = read_edf(p)
    np.testing.assert_allclose(r.data, x, atol=6553.5 / 65535 + 1e-9)
    assert [(e.onset, e.label) for e in r.events] == [(80, "T1"), (160, "T2")]


def test_corrupt_edf_is_an_error(tmp_path):
    p = tmp_path / "bad.edf"
    p.write_bytes(b"not an edf at all")
    with pytest.raises(EdfError):
        read_edf(p)


# --- PhysioNet conventions -----------------------------------------------------

def test_physionet_class_map():
    assert physionet_class_map(4, "T1") == "LeftHand"
    assert physionet_class_map(6, "T2") == "BothLegs"
    assert physionet_class_map(1, "T0") is None


def test_excluded_subjects():
    s = excluded_subjects()
    assert 89 in s and 100 in s and 1 not in s
    assert s == {88, 89, 92, 100}


def test_run_filename_and_relabel():
    assert parse_run_filename("S089R04.edf") == (89, 4)
    assert parse_run_filename("notes.edf") is None
    r = tiny_recording(events=[Event(1, "T0"), Event(2, "T1"), Event(3, "T2")])
    assert [e.label for e in relabel_physionet(r, 8).events] == ["LeftHand", "RightHand"]


# --- epochs --------------------------------------------------------------------

def test_epoch_length_at_160_hz():
    r = tiny_recording(2, 700, fs=160.0, events=[Event(0, "Active")])
    es = epochs_from_events(r, TWO_CLASS, 4.0)
    assert es.data.shape == (1, 2, 640)


def test_event_near_end_is_skipped_with_warning(caplog):
    r = tiny_recording(2, 700, fs=160.0, events=[Event(699, "Calm")])
    with caplog.at_level(logging.WARNING):
        es = epochs_from_events(r, TWO_CLASS, 4.0)
    assert len(es) == 0 and "skipping" in caplog.text


def test_five_sessions_of_sixteen_tasks_give_eighty_epochs():
    fs = 160.0
    sets = []
    for s in range(5):
        events = [Event(int(i * 4.5 * fs), "Active" if i % 2 else "Calm") for i in range(16)]
        sets.append(epochs_from_events(tiny_recording(2, int(16 * 4.5 * fs), fs, events, seed=s), TWO_CLASS))
    assert len(concat_epochsets(sets)) == 80


@settings(max_examples=30, deadline=None)
@given(st.lists(st.integers(0, 1200), max_size=12), st.floats(0.5, 4.0))
def test_epoch_count_equals_in_range_events(onsets, length):
    fs = 100.0
    r = tiny_recording(2, 1000, fs, [Event(o, "Active") for o in onsets if o < 1000])
    es = epochs_from_events(r, TWO_CLASS, length)
    L = int(round(length * fs))
    assert len(es) == sum(o + L <= 1000 for o in onsets if o < 1000)
    assert es.n_samples == L


def test_unmapped_labels_are_ignored():
    r = tiny_recording(2, 1000, 100.0, [Event(0, "LeftHand"), Event(10, "Active")])
    assert len(epochs_from_events(r, TWO_CLASS, 1.0)) == 1
    assert len(epochs_from_events(r, FOUR_CLASS, 1.0)) == 1


# --- synthesis -----------------------------------------------------------------

def test_same_seed_same_recording():
    a, _ = synthesize(two_class_config(seed=3, epochs_per_class=3))
    b, _ = synthesize(two_class_config(seed=3, epochs_per_class=3))
    np.testing.assert_array_equal(a.data, b.data)
    assert a.events == b.events


def test_config_dict_round_trip():
    cfg = two_class_config(seed=1)
    assert SynthConfig.from_dict(cfg.to_dict()) == cfg


def test_zero_gain_is_refused():
    with pytest.raises(ValueError, match="gain"):
        validate_config(two_class_config(gain=0.0))


def _band_power(epochs, ch, lo, hi):
    mag = fft_abs_array(epochs.data[:, ch, None, :])
    return band_average(mag, epochs.fs / epochs.n_samples, lo, hi)[:, 0]


def test_gain_three_on_c3_raises_alpha_power():
    # oracle: 10-12 Hz FFT magnitude on C3, A epochs against the rest
    mod = BandModulation(11.0, 2.0, 3.0, ("C3",))
    cfg = SynthConfig(classes=(ClassSpec(0, "Calm"), ClassSpec(1, "Active", (mod,))), epochs_per_class=20, seed=5)
    rec, _ = synthesize(cfg)
    es = epochs_from_events(rec, TWO_CLASS)
    p = _band_power(es, rec.montage.index("C3"), 10, 12)
    assert p[es.class_ids == 1].mean() > 1.5 * p[es.class_ids == 0].mean()


def test_unit_gain_leaves_classes_equal():
    mod = BandModulation(11.0, 2.0, 1.0, ("C3",))
    cfg = SynthConfig(classes=(ClassSpec(0, "Calm", (mod,)), ClassSpec(1, "Active", (mod,))), epochs_per_class=30, seed=2)
    rec, _ = synthesize(cfg)
    es = epochs_from_events(rec, TWO_CLASS)
    p = _band_power(es, rec.montage.index("C3"), 10, 12)
    a, c = p[es.class_ids == 1], p[es.class_ids == 0]
    assert abs(a.mean() - c.mean()) < 3 * np.sqrt(a.var() / len(a) + c.var() / len(c))


def test_blocks_are_back_to_back():
    cfg = two_class_config(seed=0)
    rec = synthesize_blocks(cfg, [1, 0, 1], 1.6)
    assert rec.n_samples == round(3 * 1.6 * cfg.fs)
    assert [e.label for e in rec.events] == ["Active", "Calm", "Active"]
