"""Native container: ``b"MRC1"`` + uint32-LE header length + UTF-8 JSON header + payload.

The same framing carries recordings, calibration models and feature batches;
the header's ``kind`` field tells them apart and ``arrays`` lists each payload
block (name, dtype, shape, byte offset). Payloads are little-endian and
C-ordered, so a recording's samples are stored channel-major.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from ..core import Event, Montage, Recording, validate_recording

MAGIC = b"MRC1"
_DTYPES = {"float32": "<f4", "float64": "<f8", "int16": "<i2", "int32": "<i4", "int64": "<i8"}


class ContainerError(ValueError):
    pass


def write_blob(path, kind: str, header: dict, arrays: dict[str, np.ndarray] | None = None) -> None:
    """Write a header plus named arrays. Each array keeps its own dtype."""
    arrays = arrays or {}
    blocks = []
    specs = []
    offset = 0
    for name, arr in arrays.items():
        arr = np.asarray(arr)
        tag = arr.dtype.name
        if tag not in _DTYPES:
            raise ContainerError(f"unsupported dtype {tag} for array {name!r}")
        raw = np.ascontiguousarray(arr, dtype=_DTYPES[tag]).tobytes()
        specs.append({"name": name, "dtype": tag, "shape": list(arr.shape), "offset": offset, "nbytes": len(raw)})
        blocks.append(raw)
        offset += len(raw)
    full = dict(header)
    full["kind"] = kind
    full["arrays"] = specs
    full["payload_bytes"] = offset
    hdr = json.dumps(full, sort_keys=True, separators=(",", ":")).encode("utf-8")
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<I", len(hdr)))
        f.write(hdr)
        for b in blocks:
            f.write(b)


def read_blob(path, kind: str | None = None) -> tuple[dict, dict[str, np.ndarray]]:
    raw = Path(path).read_bytes()
    if len(raw) < 8 or raw[:4] != MAGIC:
        raise ContainerError(f"{path}: not a container file")
    (hlen,) = struct.unpack("<I", raw[4:8])
    if 8 + hlen > len(raw):
        raise ContainerError(f"{path}: corrupt container (header truncated)")
    try:
        header = json.loads(raw[8 : 8 + hlen].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ContainerError(f"{path}: corrupt container (bad header: {exc})") from None
    if kind is not None and header.get("kind") != kind:
        raise ContainerError(f"{path}: expected a {kind!r} container, found {header.get('kind')!r}")
    payload = memoryview(raw)[8 + hlen :]
    if len(payload) != header.get("payload_bytes", -1):
        raise ContainerError(
            f"{path}: corrupt container (payload has {len(payload)} bytes, "
            f"header declares {header.get('payload_bytes')})"
        )
    arrays = {}
    for spec in header["arrays"]:
        dt = np.dtype(_DTYPES[spec["dtype"]])
        n = int(np.prod(spec["shape"])) if spec["shape"] else 1
        if spec["nbytes"] != n * dt.itemsize or spec["offset"] + spec["nbytes"] > len(payload):
            raise ContainerError(f"{path}: corrupt container (array {spec['name']!r} does not fit its shape)")
        block = payload[spec["offset"] : spec["offset"] + spec["nbytes"]]
        arrays[spec["name"]] = np.frombuffer(block, dtype=dt).reshape(spec["shape"]).astype(dt.newbyteorder("="))
    return header, arrays


def write_container(r: Recording, path, encoding: str = "float32", extra: dict | None = None) -> None:
    """Write a recording. ``encoding`` is ``float32``, ``float64`` or ``int16``.
    ``extra`` is stored verbatim in the header (provenance, seeds).

    int16 stores ``round(x / scale)`` with ``scale = max|x| / 32767`` recorded
    in the header, so the round trip is within one quantization step.
    """
    problems = validate_recording(r)
    if problems:
        raise ValueError("invalid recording: " + "; ".join(problems))
    header = {
        "fs": r.fs,
        "n_channels": r.n_channels,
        "n_samples": r.n_samples,
        "channel_names": list(r.montage.channel_names),
        "positions": r.montage.positions.tolist(),
        "eye_proxy_channels": list(r.montage.eye_proxy_channels),
        "subject_id": r.subject_id,
        "events": [{"onset": e.onset, "duration": e.duration, "label": e.label} for e in r.events],
        "encoding": encoding,
    }
    if extra:
        header["extra"] = extra
    if encoding == "int16":
        peak = float(np.max(np.abs(r.data))) if r.data.size else 0.0
        scale = peak / 32767.0 if peak > 0 else 1.0
        header["scale"] = scale
        payload = np.round(r.data / scale).astype(np.int16)
    elif encoding in ("float32", "float64"):
        payload = r.data.astype(encoding)
    else:
        raise ValueError(f"unknown sample encoding {encoding!r}")
    write_blob(path, "recording", header, {"samples": payload})


def read_container(path) -> Recording:
    header, arrays = read_blob(path, kind="recording")
    samples = arrays.get("samples")
    c, n = header["n_channels"], header["n_samples"]
    if samples is None or samples.shape != (c, n) or len(header["channel_names"]) != c:
        raise ContainerError(f"{path}: corrupt container (payload does not match {c} x {n} samples)")
    data = samples.astype(np.float64)
    if header["encoding"] == "int16":
        data = data * header["scale"]
    montage = Montage(tuple(header["channel_names"]), np.asarray(header["positions"]), tuple(header["eye_proxy_channels"]))
    events = tuple(Event(int(e["onset"]), e["label"], int(e["duration"])) for e in header["events"])
    rec = Recording(data, header["fs"], montage, events, header.get("subject_id", ""))
    problems = validate_recording(rec)
    if problems:
        raise ContainerError(f"{path}: corrupt container ({'; '.join(problems)})")
    return rec
