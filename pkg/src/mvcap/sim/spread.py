"""Capture-spread measurement: the synchronization quality metric.

Records stamp their capture times on the device clock; the simulator's
clock parameters are the oracle that maps them back to true time, where the
per-trigger spread (latest minus earliest device) is measured.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .clock import DeviceClock


@dataclass
class SpreadReport:
    per_trigger_ms: dict
    mean_ms: float
    std_ms: float

    def __iter__(self):
        return iter((self.per_trigger_ms, self.mean_ms, self.std_ms))


def measure_capture_spread(records, clocks: list[DeviceClock]) -> SpreadReport:
    """Per-trigger true capture spread (ms) plus its mean and std.

    ``records`` is any iterable of objects with ``device_id``, ``trigger_id``
    and ``capture_time_ns``; triggers captured by fewer than two devices are
    skipped.
    """
    times: dict[int, list[float]] = {}
    for r in records:
        true_t = clocks[r.device_id].true_time_from_ns(r.capture_time_ns)
        times.setdefault(r.trigger_id, []).append(true_t)
    per = {t: 1e3 * (max(v) - min(v)) for t, v in sorted(times.items())
           if len(v) >= 2}
    vals = np.array(list(per.values()))
    if len(vals) == 0:
        return SpreadReport({}, float("nan"), float("nan"))
    return SpreadReport(per, float(np.mean(vals)), float(np.std(vals)))
