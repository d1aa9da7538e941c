import numpy as np
import pytest

from mindrace.core import STANDARD_64, Event, EpochSet, LabelScheme, Montage, Recording, validate_recording
from conftest import tiny_recording


def test_well_formed_recording_has_no_diagnostics():
    assert validate_recording(tiny_recording(events=[Event(10, "Active")])) == []


def test_event_at_end_is_out_of_range():
    r = tiny_recording(n_samples=100, events=[Event(100, "Active")])
    diags = validate_recording(r)
    assert len(diags) == 1 and "event out of range" in diags[0]


def test_channel_count_mismatch():
    m = Montage.standard(["C3", "Cz", "C4", "Pz", "Fz"])
    r = Recording(np.zeros((4, 50)), 100.0, m)
    diags = validate_recording(r)
    assert len(diags) == 1 and "channel count mismatch" in diags[0]


def test_standard_positions_on_unit_sphere():
    m = Montage.standard()
    assert m.n_channels == 64 == len(STANDARD_64)
    np.testing.assert_allclose(np.linalg.norm(m.positions, axis=1), 1.0, atol=1e-6)
    assert set(m.eye_proxy_channels) == {"Fp1", "Fp2", "AF7", "AF8"}


def test_montage_rejects_duplicates_and_foreign_eye_proxies():
    with pytest.raises(ValueError, match="unique"):
        Montage.standard(["C3", "C3"])
    with pytest.raises(ValueError, match="subset"):
        Montage.standard(["C3", "C4"], eye_proxies=["Fp1"])


def test_montage_names_are_canonicalized():
    m = Montage.standard(["c3..", "FP1."])
    assert m.channel_names == ("C3", "Fp1")


def test_montage_dict_round_trip():
    m = Montage.standard(["Fp1", "C3", "C4"])
    assert Montage.from_dict(m.to_dict()) == m


def test_recording_is_immutable():
    r = tiny_recording()
    with pytest.raises(ValueError):
        r.data[0, 0] = 1.0


def test_label_scheme_checks_ids():
    with pytest.raises(ValueError):
        LabelScheme({"a": 2}, ("a",))


def test_epochset_select_keeps_metadata():
    m = Montage.standard(["C3", "C4"])
    es = EpochSet(np.zeros((3, 2, 10)), [0, 1, 0], [0, 1, 2], 10.0, m, "s1", ("Calm", "Active"))
    sub = es.select([2, 1])
    assert list(sub.class_ids) == [0, 1] and list(sub.epoch_index) == [2, 1]
    assert sub.subject_id == "s1" and sub.class_names == ("Calm", "Active")
