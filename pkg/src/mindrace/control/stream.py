"""Sample streams: file replay and a loopback socket feed."""

from __future__ import annotations

import socket
import struct
import threading
import time

import numpy as np

from ..core import Recording

_FRAME = struct.Struct("<II")  # channels, samples; float32 payload follows


class SampleStream:
    """Interface: ``read()`` returns the next (channels, n) chunk or ``None`` at the end."""

    fs: float
    n_channels: int

    def read(self) -> np.ndarray | None:
        raise NotImplementedError

    def close(self) -> None:
        pass


class ReplayStream(SampleStream):
    """Replays an array in fixed chunks; ``paced`` sleeps to keep real time."""

    def __init__(self, data, fs: float, chunk: int | None = None, paced: bool = False):
        if isinstance(data, Recording):
            data = data.data
        self.data = np.asarray(data, dtype=float)
        if self.data.ndim != 2:
            raise ValueError("replay data must be (channels, samples)")
        self.fs = float(fs)
        self.n_channels = self.data.shape[0]
        self.chunk = int(chunk or max(1, round(0.1 * fs)))
        self.paced = paced
        self._pos = 0
        self._t0: float | None = None

    def read(self):
        if self._pos >= self.data.shape[1]:
            return None
        if self.paced:
            if self._t0 is None:
                self._t0 = time.monotonic()
            due = self._t0 + (self._pos + self.chunk) / self.fs
            delay = due - time.monotonic()
            if delay > 0:
                time.sleep(delay)
        out = self.data[:, self._pos : self._pos + self.chunk]
        self._pos += out.shape[1]
        return out


class SocketStream(SampleStream):
    """Reads float32 frames from a loopback socket fed by another thread."""

    def __init__(self, sock: socket.socket, fs: float, n_channels: int, timeout: float = 5.0):
        self.sock = sock
        self.fs = float(fs)
        self.n_channels = int(n_channels)
        self.sock.settimeout(timeout)

    def _recv_exact(self, n: int) -> bytes | None:
        buf = bytearray()
        while len(buf) < n:
            part = self.sock.recv(n - len(buf))
            if not part:
                return None
            buf += part
        return bytes(buf)

    def read(self):
        head = self._recv_exact(_FRAME.size)
        if head is None:
            return None
        c, n = _FRAME.unpack(head)
        if c != self.n_channels:
            raise ValueError(f"frame has {c} channels, stream expects {self.n_channels}")
        payload = self._recv_exact(4 * c * n)
        if payload is None:
            raise ConnectionError("stream ended inside a frame")
        return np.frombuffer(payload, dtype="<f4").reshape(c, n).astype(float)

    def close(self) -> None:
        self.sock.close()


def loopback_feed(source: SampleStream) -> tuple[SocketStream, threading.Thread]:
    """Pump ``source`` through a connected socket pair from a feeder thread."""
    a, b = socket.socketpair()

    def pump():
        try:
            while True:
                chunk = source.read()
                if chunk is None:
                    break
                x = np.ascontiguousarray(chunk, dtype="<f4")
                a.sendall(_FRAME.pack(x.shape[0], x.shape[1]) + x.tobytes())
        finally:
            a.close()

    th = threading.Thread(target=pump, name="loopback-feed", daemon=True)
    th.start()
    return SocketStream(b, source.fs, source.n_channels), th
