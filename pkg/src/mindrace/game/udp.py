"""UDP transport: one-byte datagrams, one port per player."""

from __future__ import annotations

import logging
import queue
import socket
import threading
import time
from dataclasses import dataclass

from ..core import Command
from .protocol import GameConfig, decode_command
from .race import CommandSource, TimedCommand

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class CommandPacket:
    code: int
    command: Command
    timestamp: float
    seq: int


class UdpCommandServer:
    """Receives datagrams on ``port`` and queues decoded commands.

    The receiver thread never blocks on the consumer: when the bounded queue
    is full the packet is dropped and counted. ``clock`` stamps each packet;
    it defaults to monotonic wall time and can be replaced by a stream clock.
    """

    def __init__(self, port: int = 5555, cfg: GameConfig | None = None, clock=None, host: str = "127.0.0.1"):
        self.cfg = cfg or GameConfig()
        self.clock = clock or time.monotonic
        self.queue: queue.Queue[CommandPacket] = queue.Queue(maxsize=self.cfg.queue_size)
        self.received = 0
        self.malformed = 0
        self.dropped = 0
        self._seq = 0
        self._cond = threading.Condition()
        self._sock = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
        try:
            self._sock.bind((host, port))
        except OSError as e:
            self._sock.close()
            raise OSError(f"cannot bind UDP port {port}: {e}") from e
        self._sock.settimeout(0.05)
        self.address = self._sock.getsockname()
        self._stop = threading.Event()
        self._thread = threading.Thread(target=self._serve, name=f"udp-{self.address[1]}", daemon=True)

    @property
    def port(self) -> int:
        return self.address[1]

    def start(self) -> "UdpCommandServer":
        self._thread.start()
        return self

    def _serve(self) -> None:
        while not self._stop.is_set():
            try:
                data, _ = self._sock.recvfrom(2048)
            except socket.timeout:
                continue
            except OSError:
                break
            self.handle_datagram(data)

    def handle_datagram(self, data: bytes) -> None:
        with self._cond:
            if len(data) != 1:
                self.malformed += 1
                log.warning("dropped %d-byte datagram", len(data))
            else:
                code = data[0]
                pkt = CommandPacket(code, decode_command(code, self.cfg.code_map), float(self.clock()), self._seq)
                self._seq += 1
                try:
                    self.queue.put_nowait(pkt)
                except queue.Full:
                    self.dropped += 1
            self.received += 1
            self._cond.notify_all()

    def wait_received(self, n: int, timeout: float = 2.0) -> bool:
        """Block until ``n`` datagrams (valid or not) have arrived."""
        with self._cond:
            return self._cond.wait_for(lambda: self.received >= n, timeout)

    def drain(self) -> list[CommandPacket]:
        out = []
        while True:
            try:
                out.append(self.queue.get_nowait())
            except queue.Empty:
                return out

    def close(self) -> None:
        self._stop.set()
        if self._thread.is_alive():
            self._thread.join(timeout=1.0)
        self._sock.close()

    def __enter__(self):
        return self.start()

    def __exit__(self, *exc):
        self.close()


def udp_serve(n_players: int = 1, cfg: GameConfig | None = None, clock=None, base_port: int | None = None) -> dict[int, UdpCommandServer]:
    """Start one server per player on ``base_port + player``."""
    cfg = cfg or GameConfig()
    base = cfg.base_port if base_port is None else base_port
    servers = {}
    try:
        for p in range(n_players):
            servers[p] = UdpCommandServer(base + p, cfg, clock).start()
    except OSError:
        for s in servers.values():
            s.close()
        raise
    return servers


class UdpSender:
    def __init__(self, port: int, host: str = "127.0.0.1"):
        self.target = (host, port)
        self._sock = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
        self.sent = 0

    def send(self, payload: bytes) -> None:
        self._sock.sendto(payload, self.target)
        self.sent += 1

    def close(self) -> None:
        self._sock.close()


class QueueSource(CommandSource):
    """Feeds a race from a server queue, in arrival order, by packet timestamp."""

    def __init__(self, server: UdpCommandServer):
        self.server = server
        self._pending: list[CommandPacket] = []

    def commands_before(self, t_end):
        self._pending.extend(self.server.drain())
        due = [p for p in self._pending if p.timestamp < t_end]
        self._pending = [p for p in self._pending if p.timestamp >= t_end]
        return [TimedCommand(p.timestamp, p.seq, p.command) for p in due]
