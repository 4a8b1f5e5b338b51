"""Seeded network models: lossy datagram links and capped reliable pipes.

A datagram link delivers at send time + base latency + jitter, or loses the
message with probability p. A reliable pipe never loses but serializes
bytes through a FIFO fluid queue at a byte/s capacity, which is where
congestion and buffering behaviour comes from.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

LOST = None


def lognormal_jitter(rng, std_s: float, shape: float = 0.75) -> float:
    """Positive jitter sample with the requested standard deviation."""
    if std_s <= 0:
        return 0.0
    # X = exp(N(0, shape)); rescale so std(k X) = std_s
    raw_std = np.sqrt((np.exp(shape ** 2) - 1.0) * np.exp(shape ** 2))
    return float(rng.lognormal(0.0, shape)) * std_s / raw_std


@dataclass
class LinkModel:
    """One direction of a point-to-point path."""

    base_latency_s: float = 0.005
    jitter_std_s: float = 0.0
    loss_p: float = 0.0
    jitter: str = "lognormal"  # or "normal" (clipped at zero delay)

    def sample_delay(self, rng) -> float:
        if self.jitter_std_s <= 0:
            return self.base_latency_s
        if self.jitter == "normal":
            return max(0.0, self.base_latency_s + rng.normal(0.0, self.jitter_std_s))
        return self.base_latency_s + lognormal_jitter(rng, self.jitter_std_s)

    def deliver(self, send_time_s: float, rng):
        """Delivery time for one datagram, or LOST."""
        if self.loss_p > 0 and rng.random() < self.loss_p:
            return LOST
        return send_time_s + self.sample_delay(rng)


def network_deliver(send_time_s: float, link: LinkModel, rng):
    """Functional form of LinkModel.deliver (returns time or LOST)."""
    return link.deliver(send_time_s, rng)


class DatagramLink:
    """Event-loop adapter for a LinkModel: schedules or drops deliveries."""

    def __init__(self, loop, model: LinkModel, rng):
        self.loop = loop
        self.model = model
        self.rng = rng
        self.sent = 0
        self.lost = 0

    def send(self, payload, on_deliver) -> None:
        self.sent += 1
        at = self.model.deliver(self.loop.now, self.rng)
        if at is LOST:
            self.lost += 1
            return
        self.loop.schedule(at, on_deliver, payload)


@dataclass
class PipeStats:
    bytes_offered: int = 0
    bytes_delivered: int = 0
    max_backlog_bytes: int = 0


class ReliablePipe:
    """Shared FIFO byte pipe with a capacity cap and fixed delivery latency.

    Transmission of a message starts when the previous one finished
    (fluid-queue arithmetic: start = max(now, last_departure)), takes
    size/capacity seconds, then the message arrives base_latency later.
    Unbounded queue: congestion shows up as backlog, the sender-side buffer
    is where drops happen.
    """

    def __init__(self, loop, capacity_bytes_per_s: float | None,
                 base_latency_s: float = 0.005,
                 jitter_std_s: float = 0.0, rng=None):
        self.loop = loop
        self.capacity = capacity_bytes_per_s
        self.base_latency_s = base_latency_s
        self.jitter_std_s = jitter_std_s
        self.rng = rng
        self._free_at = 0.0
        self._backlog = 0
        self.stats = PipeStats()

    def submit(self, nbytes: int, on_deliver, on_sent=None) -> float:
        """Queue ``nbytes``; returns the departure (transmission-done) time."""
        now = self.loop.now
        self.stats.bytes_offered += nbytes
        start = max(now, self._free_at)
        tx = 0.0 if not self.capacity else nbytes / self.capacity
        departure = start + tx
        self._free_at = departure
        self._backlog += nbytes
        self.stats.max_backlog_bytes = max(self.stats.max_backlog_bytes,
                                           self._backlog)
        jitter = 0.0
        if self.jitter_std_s > 0 and self.rng is not None:
            jitter = lognormal_jitter(self.rng, self.jitter_std_s)
        arrival = departure + self.base_latency_s + jitter

        def _departed():
            self._backlog -= nbytes
            self.stats.bytes_delivered += nbytes
            if on_sent is not None:
                on_sent()

        self.loop.schedule(departure, _departed)
        self.loop.schedule(arrival, on_deliver)
        return departure

    @property
    def backlog_bytes(self) -> int:
        return self._backlog

    @property
    def busy_until(self) -> float:
        return self._free_at
