"""Fixed-rate streaming pipeline from a demonstrator frame source to an
executor endpoint.

Producer and consumer are decoupled by a small drop-oldest queue: under
backpressure the newest frame wins, and delivery order (by sequence number)
is preserved.  run_session executes the pipeline in virtual time driven by
the frame timestamps, which keeps experiments deterministic and fast; the
live server runs the same mechanics against the wall clock.
"""

from __future__ import annotations

import socket
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Iterable

import numpy as np

from .kinematics import N_TENDONS
from .mapping import ScaleMapping, StiffnessProfile, TrackingParams, executor_track, map_tendons
from .protocol import FRAME_SIZE, TendonFrame, decode_frame, encode_frame

DEFAULT_RATE_HZ = 100.0
QUEUE_CAPACITY = 4


class TransportError(RuntimeError):
    """Frame transport failed; the session ends with partial stats."""


@dataclass
class SessionConfig:
    rate_hz: float = DEFAULT_RATE_HZ
    scale: ScaleMapping = field(default_factory=ScaleMapping)
    profile: StiffnessProfile = field(default_factory=StiffnessProfile)
    tracking: TrackingParams = field(default_factory=TrackingParams)
    endpoint: str = "loop://"
    queue_capacity: int = QUEUE_CAPACITY

    def __post_init__(self):
        if not 1.0 <= self.rate_hz <= 1000.0:
            raise ValueError("frame rate must be within [1, 1000] Hz")
        if self.queue_capacity < 1:
            raise ValueError("queue capacity must be >= 1")

    @property
    def period_us(self) -> int:
        return int(round(1e6 / self.rate_hz))


@dataclass
class SessionStats:
    produced: int = 0
    delivered: int = 0
    dropped: int = 0
    stalls: int = 0
    mean_latency_s: float = 0.0
    error: str | None = None

    @property
    def drop_fraction(self) -> float:
        return self.dropped / self.produced if self.produced else 0.0


class DropOldestQueue:
    """Bounded FIFO that discards its oldest entry when full."""

    def __init__(self, capacity: int):
        self._items: deque = deque()
        self._capacity = capacity
        self.dropped = 0

    def push(self, item) -> None:
        if len(self._items) >= self._capacity:
            self._items.popleft()
            self.dropped += 1
        self._items.append(item)

    def pop(self):
        return self._items.popleft() if self._items else None

    def __len__(self) -> int:
        return len(self._items)


def run_session(
    source: Iterable[TendonFrame],
    sink: Callable[[TendonFrame], None],
    cfg: SessionConfig,
    on_apply: Callable[[int, np.ndarray], None] | None = None,
) -> SessionStats:
    """Pump frames from source to sink at the configured rate (virtual time).

    Frames enter the drop-oldest queue at their own timestamps; consumer
    ticks fire every period, scale the dequeued frame's displacements, track
    the executor tendons toward them and hand the executor frame to the
    sink.  A tick with an empty queue counts as a stall.  Exceptions from
    the source or sink terminate the session with partial stats recorded.

    on_apply, when given, observes the executor's full-precision tendon
    state after each applied tick (the outbound frames carry the float32
    wire resolution).
    """
    queue = DropOldestQueue(cfg.queue_capacity)
    stats = SessionStats()
    executor = np.zeros(N_TENDONS)
    dt = 1.0 / cfg.rate_hz
    period = cfg.period_us
    next_tick: int | None = None
    latency_sum = 0.0

    def consume(tick_us: int):
        nonlocal executor, latency_sum
        frame = queue.pop()
        if frame is None:
            stats.stalls += 1
            return
        commanded = map_tendons(np.asarray(frame.displacements), cfg.scale)
        executor = executor_track(commanded, executor, cfg.tracking, dt)
        out = TendonFrame(seq=frame.seq, t_us=tick_us,
                          displacements=tuple(executor), currents=frame.currents)
        sink(out)
        if on_apply is not None:
            on_apply(tick_us, executor.copy())
        latency_sum += (tick_us - frame.t_us) / 1e6
        stats.delivered += 1

    try:
        for frame in source:
            if next_tick is None:
                next_tick = int(frame.t_us)
            while next_tick < frame.t_us:
                consume(next_tick)
                next_tick += period
            queue.push(frame)
            stats.produced += 1
        if next_tick is not None:
            while len(queue):
                consume(next_tick)
                next_tick += period
    except TransportError as exc:
        stats.error = str(exc)
    stats.dropped = queue.dropped
    if stats.delivered:
        stats.mean_latency_s = latency_sum / stats.delivered
    return stats


# ---------------------------------------------------------------------------
# stream-socket transport (fixed-size frames over TCP)

def send_frame(sock: socket.socket, frame: TendonFrame) -> None:
    try:
        sock.sendall(encode_frame(frame))
    except OSError as exc:
        raise TransportError(f"send failed: {exc}") from exc


def recv_frame(sock: socket.socket) -> TendonFrame | None:
    """Read exactly one frame; None on clean end of stream."""
    chunks = bytearray()
    while len(chunks) < FRAME_SIZE:
        try:
            part = sock.recv(FRAME_SIZE - len(chunks))
        except OSError as exc:
            raise TransportError(f"recv failed: {exc}") from exc
        if not part:
            if chunks:
                raise TransportError("stream ended mid-frame")
            return None
        chunks.extend(part)
    return decode_frame(bytes(chunks))


def stream_frames(sock: socket.socket):
    """Generator over a socket's frames until end of stream."""
    while True:
        frame = recv_frame(sock)
        if frame is None:
            return
        yield frame
