"""Grouping verified records by trigger id before persistence.

Records from different devices arrive interleaved and disordered; the
merger emits a MergedCapture for trigger T either when every expected
device has contributed (complete) or when the watermark rule fires: all
devices have been seen with some id beyond T, or T has waited longer than
the flush timeout. Duplicates keep the first record; late records for an
already-emitted trigger are dropped and counted.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

from .record import CaptureRecord

DEFAULT_WATERMARK_TIMEOUT_S = 0.5


@dataclass
class MergedCapture:
    trigger_id: int
    records: dict[int, CaptureRecord]
    expected_devices: int

    @property
    def completeness(self) -> float:
        return len(self.records) / self.expected_devices

    @property
    def complete(self) -> bool:
        return len(self.records) == self.expected_devices


class TriggerMerger:
    def __init__(self, expected_devices: list[int],
                 watermark_timeout_s: float = DEFAULT_WATERMARK_TIMEOUT_S):
        self.expected = list(expected_devices)
        self.timeout_s = watermark_timeout_s
        self._pending: dict[int, dict[int, CaptureRecord]] = {}
        self._first_seen: dict[int, float] = {}
        self._max_seen: dict[int, int] = {}
        self._emitted: set[int] = set()
        self.duplicates = Counter()
        self.late_records = 0

    def push(self, record: CaptureRecord, now_s: float) -> list[MergedCapture]:
        """Add one verified record; returns any captures that became emittable."""
        t = record.trigger_id
        d = record.device_id
        prev = self._max_seen.get(d)
        if prev is None or t > prev:
            self._max_seen[d] = t
        if t in self._emitted:
            self.late_records += 1
            return []
        group = self._pending.setdefault(t, {})
        if d in group:
            self.duplicates[(d, t)] += 1
            return []
        group[d] = record
        self._first_seen.setdefault(t, now_s)
        return self._collect(now_s)

    def flush(self, now_s: float) -> list[MergedCapture]:
        """Emit whatever the watermark/timeout rules allow at ``now_s``."""
        return self._collect(now_s)

    def finish(self) -> list[MergedCapture]:
        """End of session: emit every pending capture in id order."""
        out = [self._emit(t) for t in sorted(self._pending)]
        return out

    def _watermark_passed(self, trigger_id: int) -> bool:
        if len(self._max_seen) < len(self.expected):
            return False
        return all(self._max_seen.get(d, -1) > trigger_id for d in self.expected)

    def _collect(self, now_s: float) -> list[MergedCapture]:
        # emission is in id order: only the lowest pending trigger can go out,
        # and a complete younger trigger implies the watermark has passed for
        # every older one, so ordering never stalls completeness
        out = []
        while self._pending:
            t = min(self._pending)
            group = self._pending[t]
            timed_out = now_s - self._first_seen[t] >= self.timeout_s
            if len(group) == len(self.expected) or self._watermark_passed(t) \
                    or timed_out:
                out.append(self._emit(t))
            else:
                break
        return out

    def _emit(self, trigger_id: int) -> MergedCapture:
        group = self._pending.pop(trigger_id)
        self._first_seen.pop(trigger_id, None)
        self._emitted.add(trigger_id)
        return MergedCapture(trigger_id, group, len(self.expected))
