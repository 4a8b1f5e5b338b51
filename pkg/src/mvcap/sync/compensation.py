"""Round-trip-time bookkeeping and the per-client delay compensation rule.

The host probes each client's RTT over the trigger path, averages the
samples per client, takes the session-wide maximum mean, and assigns each
client an artificial capture delay of half the gap to that maximum. The host
itself waits half the maximum. Under symmetric one-way delays every device
then captures at the same true instant.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import EmptyMatrix, MissingOffset, MissingPlan, NoClients


@dataclass(frozen=True)
class RttMatrix:
    """Per-client RTT samples in milliseconds, shape (clients, samples)."""

    samples: np.ndarray

    def __post_init__(self):
        s = np.array(self.samples, dtype=np.float64)
        if s.ndim != 2:
            raise ValueError("samples must be a 2D (clients x samples) array")
        if s.size and (not np.all(np.isfinite(s)) or np.any(s < 0)):
            raise ValueError("RTT samples must be finite and non-negative")
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)

    @property
    def client_count(self) -> int:
        return self.samples.shape[0]

    @property
    def sample_count(self) -> int:
        return self.samples.shape[1]


def mean_rtt(matrix: RttMatrix) -> np.ndarray:
    """Per-client mean RTT in milliseconds."""
    if matrix.sample_count == 0:
        raise EmptyMatrix("need at least one RTT sample per client")
    return matrix.samples.mean(axis=1)


def max_rtt(means) -> float:
    """Session-wide maximum of the per-client mean RTTs."""
    means = np.asarray(means, dtype=float)
    if means.size == 0:
        raise NoClients("need at least one client")
    return float(means.max())


@dataclass(frozen=True)
class CompensationPlan:
    """Capture delays that align all devices on the slowest client."""

    client_means_ms: np.ndarray   # l_bar per client
    max_rtt_ms: float             # the session maximum
    client_delays_ms: np.ndarray  # (max - l_bar) / 2 per client
    host_delay_ms: float          # max / 2

    def delay_for(self, client_index: int) -> float:
        return float(self.client_delays_ms[client_index])


def compensation_plan(means) -> CompensationPlan:
    """Build the per-device delay plan from per-client mean RTTs."""
    means = np.asarray(means, dtype=float)
    if means.size == 0:
        raise NoClients("need at least one client")
    if not np.all(np.isfinite(means)) or np.any(means < 0):
        raise ValueError("mean RTTs must be finite and non-negative")
    top = max_rtt(means)
    delays = 0.5 * (top - means)
    delays.setflags(write=False)
    means = means.copy()
    means.setflags(write=False)
    return CompensationPlan(means, top, delays, 0.5 * top)


def plan_from_samples(matrix: RttMatrix) -> CompensationPlan:
    return compensation_plan(mean_rtt(matrix))


HOST = "host"


def capture_instant(scheme,
                    trigger_time_s: float,
                    plan: CompensationPlan | None = None,
                    role=HOST,
                    offset_estimate_s: float | None = None) -> float:
    """Local capture time for one device after a trigger event.

    For the trigger-relay scheme, ``trigger_time_s`` is the trigger arrival
    on a client (or the send time on the host) and the plan's delay is added.
    For NTP schemes it is the globally-agreed instant expressed on the host
    clock, mapped onto the local clock through the estimated offset
    (offset = host clock minus local clock).
    """
    from .ntp import SyncVariant  # local import to avoid a cycle

    if scheme.variant is SyncVariant.TRIGGER_RELAY:
        if plan is None:
            raise MissingPlan("trigger-relay capture requires a compensation plan")
        if role == HOST:
            return trigger_time_s + plan.host_delay_ms / 1e3
        return trigger_time_s + plan.delay_for(int(role)) / 1e3
    if offset_estimate_s is None:
        raise MissingOffset("NTP capture requires a clock-offset estimate")
    return trigger_time_s - offset_estimate_s
