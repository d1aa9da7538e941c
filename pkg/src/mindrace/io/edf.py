"""Minimal EDF / EDF+ reader and writer for 16-bit continuous recordings.

Supports what the public motor-imagery dataset uses: equal sample rates for
all data signals and at most one ``EDF Annotations`` signal carrying TALs
(``+onset[\\x15duration]\\x14text\\x14...\\x00``). BDF and discontinuous
EDF+D files are rejected.
"""

from __future__ import annotations

import logging
from pathlib import Path

import numpy as np

from ..core import Event, Montage, Recording

log = logging.getLogger(__name__)

ANNOTATION_LABEL = "EDF Annotations"
_UNIT_TO_UV = {"uv": 1.0, "µv": 1.0, "μv": 1.0, "mv": 1e3, "v": 1e6, "nv": 1e-3}


class EdfError(ValueError):
    pass


class UnsupportedEdf(EdfError):
    pass


def _field(raw: bytes, start: int, width: int) -> str:
    return raw[start : start + width].decode("latin-1").strip()


def _signal_fields(raw: bytes, ns: int) -> dict[str, list[str]]:
    widths = [
        ("label", 16), ("transducer", 80), ("dimension", 8), ("phys_min", 8), ("phys_max", 8),
        ("dig_min", 8), ("dig_max", 8), ("prefilter", 80), ("n_samples", 8), ("reserved", 32),
    ]
    out = {}
    pos = 256
    for name, w in widths:
        out[name] = [_field(raw, pos + i * w, w) for i in range(ns)]
        pos += ns * w
    return out


def parse_tals(blob: bytes) -> list[tuple[float, float, str]]:
    """Parse time-stamped annotation lists into ``(onset_s, duration_s, text)``.

    Time-keeping TALs (no annotation text) are skipped.
    """
    out = []
    for tal in blob.split(b"\x00"):
        if not tal.strip(b"\x00"):
            continue
        parts = tal.split(b"\x14")
        stamp = parts[0].decode("latin-1")
        if "\x15" in stamp:
            onset_s, dur_s = stamp.split("\x15", 1)
            duration = float(dur_s) if dur_s else 0.0
        else:
            onset_s, duration = stamp, 0.0
        try:
            onset = float(onset_s)
        except ValueError:
            raise EdfError(f"malformed annotation onset {onset_s!r}") from None
        for text in parts[1:]:
            label = text.decode("utf-8", errors="replace").strip()
            if label:
                out.append((onset, duration, label))
    return out


def read_edf(path, montage: Montage | None = None, subject_id: str | None = None) -> Recording:
    """Read a 16-bit EDF/EDF+ file into a :class:`Recording` in microvolts.

    Each digital sample ``d`` maps linearly onto the physical range:
    ``pmin + (d - dmin) * (pmax - pmin) / (dmax - dmin)``, then the physical
    dimension is converted to microvolts. ``montage`` overrides the montage
    derived from the signal labels.
    """
    raw = Path(path).read_bytes()
    if len(raw) < 256:
        raise EdfError(f"{path}: file shorter than the EDF header")
    if raw[0] != ord("0") or raw[1:8].strip() not in (b"",):
        if raw[:8] == b"\xffBIOSEMI":
            raise UnsupportedEdf(f"{path}: 24-bit BDF encoding is not supported")
        raise UnsupportedEdf(f"{path}: unsupported EDF version field {raw[:8]!r}")
    header_bytes = int(_field(raw, 184, 8))
    reserved = _field(raw, 192, 44)
    if reserved.startswith("EDF+D"):
        raise UnsupportedEdf(f"{path}: discontinuous EDF+D recordings are not supported")
    n_records = int(_field(raw, 236, 8))
    record_dur = float(_field(raw, 244, 8))
    ns = int(_field(raw, 252, 4))
    if header_bytes != 256 * (ns + 1):
        raise EdfError(f"{path}: corrupt header size {header_bytes} for {ns} signals")
    sig = _signal_fields(raw, ns)
    spr = [int(v) for v in sig["n_samples"]]
    record_samples = sum(spr)
    payload = len(raw) - header_bytes
    if n_records < 0:
        n_records = payload // (2 * record_samples) if record_samples else 0
    if payload != n_records * record_samples * 2:
        raise EdfError(
            f"{path}: corrupt record sizes ({payload} payload bytes, expected "
            f"{n_records} records x {record_samples * 2} bytes)"
        )
    ann_idx = [i for i, lab in enumerate(sig["label"]) if lab == ANNOTATION_LABEL]
    data_idx = [i for i in range(ns) if i not in ann_idx]
    if len(ann_idx) > 1:
        raise UnsupportedEdf(f"{path}: more than one annotation signal")
    if data_idx and len({spr[i] for i in data_idx}) != 1:
        raise UnsupportedEdf(f"{path}: data signals have different sample rates")
    if record_dur <= 0:
        raise EdfError(f"{path}: non-positive data record duration")
    n_per = spr[data_idx[0]] if data_idx else 0
    fs = n_per / record_dur

    digital = np.frombuffer(raw, dtype="<i2", offset=header_bytes, count=n_records * record_samples)
    digital = digital.reshape(n_records, record_samples)
    starts = np.concatenate([[0], np.cumsum(spr)])

    data = np.empty((len(data_idx), n_records * n_per))
    for row, i in enumerate(data_idx):
        d = digital[:, starts[i] : starts[i + 1]].reshape(-1).astype(np.float64)
        pmin, pmax = float(sig["phys_min"][i]), float(sig["phys_max"][i])
        dmin, dmax = float(sig["dig_min"][i]), float(sig["dig_max"][i])
        if dmax == dmin:
            raise EdfError(f"{path}: signal {sig['label'][i]!r} has an empty digital range")
        phys = pmin + (d - dmin) * ((pmax - pmin) / (dmax - dmin))
        unit = sig["dimension"][i].lower()
        data[row] = phys * _UNIT_TO_UV.get(unit, 1.0)

    events = []
    if ann_idx:
        i = ann_idx[0]
        blob = digital[:, starts[i] : starts[i + 1]].tobytes()
        n_total = data.shape[1]
        for onset, duration, label in parse_tals(blob):
            pos = int(round(onset * fs))
            if 0 <= pos < n_total:
                events.append(Event(pos, label, int(round(duration * fs))))
            else:
                log.warning("%s: annotation %r at %.3fs lies outside the signal", path, label, onset)

    if montage is None:
        montage = Montage.standard([sig["label"][i] for i in data_idx])
    elif montage.n_channels != len(data_idx):
        raise EdfError(f"{path}: montage override has {montage.n_channels} channels, file has {len(data_idx)}")
    if subject_id is None:
        subject_id = Path(path).stem
    return Recording(data, fs, montage, tuple(events), subject_id)


def _pad(s: str, width: int) -> bytes:
    b = str(s).encode("latin-1")[:width]
    return b + b" " * (width - len(b))


def _num(x: float, width: int = 8) -> str:
    s = repr(float(x)) if not float(x).is_integer() else str(int(x))
    return s[:width]


def write_edf(
    path,
    data: np.ndarray,
    fs: float,
    labels,
    annotations=(),
    phys_range: tuple[float, float] = (-3276.8, 3276.7),
    dig_range: tuple[int, int] = (-32768, 32767),
    record_duration: float = 1.0,
    dimension: str = "uV",
) -> None:
    """Write an EDF+C file (test fixtures and exports).

    ``annotations`` are ``(onset_s, duration_s, text)`` tuples; all of them are
    placed in the first data record.
    """
    data = np.atleast_2d(np.asarray(data, dtype=float))
    c, n = data.shape
    n_per = int(round(fs * record_duration))
    if n_per <= 0 or n % n_per:
        raise ValueError("sample count must be a whole number of data records")
    n_records = n // n_per
    pmin, pmax = phys_range
    dmin, dmax = dig_range
    digital = np.round((data - pmin) * (dmax - dmin) / (pmax - pmin) + dmin)
    digital = np.clip(digital, dmin, dmax).astype("<i2")

    tal_records = []
    for r in range(n_records):
        t = f"+{_num(r * record_duration, 20)}\x14\x14\x00"
        if r == 0:
            for onset, dur, text in annotations:
                stamp = f"+{onset:g}" + (f"\x15{dur:g}" if dur else "")
                t += f"{stamp}\x14{text}\x14\x00"
        tal_records.append(t.encode("latin-1"))
    ann_bytes = max(len(t) for t in tal_records) if tal_records else 0
    ann_spr = (ann_bytes + 1) // 2 + 1 if annotations or n_records else 0
    ns = c + 1
    hdr = bytearray()
    hdr += _pad("0", 8) + _pad("X X X X", 80) + _pad("Startdate X X X X", 80)
    hdr += _pad("01.01.09", 8) + _pad("00.00.00", 8) + _pad(str(256 * (ns + 1)), 8)
    hdr += _pad("EDF+C", 44) + _pad(str(n_records), 8) + _pad(_num(record_duration), 8) + _pad(str(ns), 4)
    all_labels = list(labels) + [ANNOTATION_LABEL]
    hdr += b"".join(_pad(lab, 16) for lab in all_labels)
    hdr += b"".join(_pad("", 80) for _ in all_labels)
    hdr += b"".join(_pad(dimension, 8) for _ in labels) + _pad("", 8)
    hdr += b"".join(_pad(_num(pmin), 8) for _ in labels) + _pad("-1", 8)
    hdr += b"".join(_pad(_num(pmax), 8) for _ in labels) + _pad("1", 8)
    hdr += b"".join(_pad(str(dmin), 8) for _ in labels) + _pad("-32768", 8)
    hdr += b"".join(_pad(str(dmax), 8) for _ in labels) + _pad("32767", 8)
    hdr += b"".join(_pad("", 80) for _ in all_labels)
    hdr += b"".join(_pad(str(n_per), 8) for _ in labels) + _pad(str(ann_spr), 8)
    hdr += b"".join(_pad("", 32) for _ in all_labels)
    body = bytearray()
    for r in range(n_records):
        body += digital[:, r * n_per : (r + 1) * n_per].tobytes()
        tal = tal_records[r]
        body += tal + b"\x00" * (2 * ann_spr - len(tal))
    Path(path).write_bytes(bytes(hdr) + bytes(body))
