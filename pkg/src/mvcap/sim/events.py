"""Deterministic discrete-event core.

Single-threaded priority queue over (time, sequence) so that identical
configurations replay identically; simultaneity resolves in scheduling
order.
"""

from __future__ import annotations

import heapq
import itertools


class EventLoop:
    def __init__(self):
        self._heap = []
        self._seq = itertools.count()
        self.now = 0.0
        self.processed = 0

    def schedule(self, time_s: float, callback, *args) -> None:
        if time_s < self.now:
            raise ValueError(f"cannot schedule at {time_s} before now={self.now}")
        heapq.heappush(self._heap, (time_s, next(self._seq), callback, args))

    def run(self, until_s: float | None = None) -> None:
        while self._heap:
            t, _, callback, args = self._heap[0]
            if until_s is not None and t > until_s:
                break
            heapq.heappop(self._heap)
            self.now = t
            callback(*args)
            self.processed += 1
        if until_s is not None and until_s > self.now:
            self.now = until_s

    @property
    def pending(self) -> int:
        return len(self._heap)
