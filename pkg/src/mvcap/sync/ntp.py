"""NTP-style clock alignment used as the comparison baseline.

The classic four-timestamp exchange estimates the offset between a client
and a reference (host) clock; the averaged variant repeats the request and
uses the mean, which is how the comparison scheme in the end-to-end delay
experiments aligns device clocks before capturing on a shared time grid.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass


class SyncVariant(enum.Enum):
    TRIGGER_RELAY = "trigger_relay"
    NTP_BASELINE = "ntp_baseline"
    NTP_AVERAGED = "ntp_averaged"


NTP_AVERAGED_REQUESTS = 50


@dataclass(frozen=True)
class SyncScheme:
    variant: SyncVariant
    ntp_request_count: int = 1

    def __post_init__(self):
        if self.ntp_request_count < 1:
            raise ValueError("ntp_request_count must be >= 1")
        if self.variant is SyncVariant.NTP_BASELINE and self.ntp_request_count != 1:
            raise ValueError("NTP baseline uses exactly one request")

    @classmethod
    def trigger_relay(cls) -> "SyncScheme":
        return cls(SyncVariant.TRIGGER_RELAY)

    @classmethod
    def ntp_baseline(cls) -> "SyncScheme":
        return cls(SyncVariant.NTP_BASELINE, 1)

    @classmethod
    def ntp_averaged(cls, requests: int = NTP_AVERAGED_REQUESTS) -> "SyncScheme":
        return cls(SyncVariant.NTP_AVERAGED, requests)


def ntp_offset_from_timestamps(t0: float, t1: float, t2: float, t3: float) -> float:
    """Offset estimate (server clock minus client clock) from one exchange.

    t0/t3 are client send/receive times on the client clock, t1/t2 server
    receive/send times on the server clock. With symmetric path delays the
    estimate is exact; an asymmetry d_fwd - d_back biases it by half that.
    """
    return 0.5 * ((t1 - t0) + (t2 - t3))


def estimate_ntp_offset(request_count: int,
                        client_clock,
                        server_clock,
                        forward_delay_s,
                        backward_delay_s,
                        start_true_time_s: float = 0.0,
                        spacing_s: float = 0.05,
                        server_turnaround_s: float = 0.0) -> float:
    """Mean offset over ``request_count`` simulated exchanges.

    ``client_clock``/``server_clock`` map true time to device time via
    ``device_time(t)``; the delay arguments are callables returning one-way
    delays in seconds for each request (constants also accepted).
    """
    if request_count < 1:
        raise ValueError("request_count must be >= 1")
    fwd = forward_delay_s if callable(forward_delay_s) else (lambda: forward_delay_s)
    bwd = backward_delay_s if callable(backward_delay_s) else (lambda: backward_delay_s)
    total = 0.0
    for k in range(request_count):
        ts = start_true_time_s + k * spacing_s
        d_fwd = fwd()
        d_back = bwd()
        t0 = client_clock.device_time(ts)
        t1 = server_clock.device_time(ts + d_fwd)
        t2 = server_clock.device_time(ts + d_fwd + server_turnaround_s)
        t3 = client_clock.device_time(ts + d_fwd + server_turnaround_s + d_back)
        total += ntp_offset_from_timestamps(t0, t1, t2, t3)
    return total / request_count
