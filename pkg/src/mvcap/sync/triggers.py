"""Host-side trigger generation."""

from __future__ import annotations

import math
from dataclasses import dataclass

from ..errors import InvalidFrequency


@dataclass(frozen=True)
class TriggerMsg:
    """One synchronization trigger.

    ``trigger_id`` increases by exactly one per trigger within a session;
    ``host_send_time_ns`` is stamped on the host clock.
    """

    session_id: int
    trigger_id: int
    host_send_time_ns: int


class UniformTriggerPolicy:
    """Fixed-rate trigger emission at ``rate_hz`` for ``duration_s`` seconds.

    Emission k happens at k / rate for k = 0 .. floor(duration * rate).
    Alternative policies (e.g. content-driven rates) can replace this object;
    the session only needs ``emission_times()``.
    """

    def __init__(self, rate_hz: float, duration_s: float):
        if rate_hz <= 0:
            raise InvalidFrequency(f"trigger frequency must be > 0, got {rate_hz}")
        if duration_s < 0:
            raise ValueError("duration must be non-negative")
        self.rate_hz = float(rate_hz)
        self.duration_s = float(duration_s)

    @property
    def count(self) -> int:
        return int(math.floor(self.duration_s * self.rate_hz + 1e-9)) + 1

    def emission_times(self) -> list[float]:
        return [k / self.rate_hz for k in range(self.count)]


def schedule_triggers(rate_hz: float, duration_s: float) -> list[float]:
    """Emission times of a uniform trigger schedule (see UniformTriggerPolicy)."""
    return UniformTriggerPolicy(rate_hz, duration_s).emission_times()
