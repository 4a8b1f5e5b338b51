"""Simulated device clocks used as the timing oracle.

Each device clock is an affine map of true (global) time: a fixed offset
plus a drift in parts per million. The inverse map is what lets experiments
measure true capture spread from device-stamped records.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class DeviceClock:
    offset_s: float = 0.0
    drift_ppm: float = 0.0

    @property
    def rate(self) -> float:
        return 1.0 + self.drift_ppm * 1e-6

    def device_time(self, true_time_s: float) -> float:
        return true_time_s * self.rate + self.offset_s

    def true_time(self, device_time_s: float) -> float:
        return (device_time_s - self.offset_s) / self.rate

    def device_time_ns(self, true_time_s: float) -> int:
        return int(round(self.device_time(true_time_s) * 1e9))

    def true_time_from_ns(self, device_time_ns: int) -> float:
        return self.true_time(device_time_ns / 1e9)


def random_clock(rng, offset_range_ms=(-50.0, 50.0),
                 drift_range_ppm=(-20.0, 20.0)) -> DeviceClock:
    return DeviceClock(
        offset_s=rng.uniform(*offset_range_ms) / 1e3,
        drift_ppm=rng.uniform(*drift_range_ppm),
    )
