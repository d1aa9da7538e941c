from __future__ import annotations

import threading

import numpy as np


class WarmingUp(RuntimeError):
    """Fewer samples buffered than requested."""


class RingBuffer:
    """Fixed-capacity multichannel sample buffer (single producer, single consumer).

    The lock is held only for the copy, so the producer is never held up by
    the consumer's processing.
    """

    def __init__(self, n_channels: int, capacity: int):
        if capacity < 1 or n_channels < 1:
            raise ValueError("capacity and channel count must be positive")
        self._buf = np.zeros((n_channels, capacity))
        self._cap = capacity
        self._write = 0
        self.total = 0
        self._lock = threading.Lock()

    @property
    def capacity(self) -> int:
        return self._cap

    @property
    def n_channels(self) -> int:
        return self._buf.shape[0]

    def push(self, samples: np.ndarray) -> None:
        x = np.asarray(samples, dtype=float)
        if x.ndim != 2 or x.shape[0] != self.n_channels:
            raise ValueError(f"expected ({self.n_channels}, n) samples, got {x.shape}")
        n = x.shape[1]
        if n == 0:
            return
        if n >= self._cap:
            x = x[:, -self._cap :]
        with self._lock:
            m = x.shape[1]
            first = min(m, self._cap - self._write)
            self._buf[:, self._write : self._write + first] = x[:, :first]
            self._buf[:, : m - first] = x[:, first:]
            self._write = (self._write + m) % self._cap
            self.total += n

    def latest(self, n: int) -> np.ndarray:
        """The most recent ``n`` samples per channel, oldest first."""
        if n > self._cap:
            raise ValueError(f"requested {n} samples from a buffer of {self._cap}")
        with self._lock:
            if self.total < n:
                raise WarmingUp(f"warming up: {self.total} of {n} samples buffered")
            idx = (self._write - n + np.arange(n)) % self._cap
            return self._buf[:, idx].copy()


def ring_push(buffer: RingBuffer, samples) -> RingBuffer:
    buffer.push(samples)
    return buffer


def ring_latest(buffer: RingBuffer, n: int) -> np.ndarray:
    return buffer.latest(n)
