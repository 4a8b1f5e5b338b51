"""Trigger-frequency / device-count / bandwidth sweeps.

Measures the time gaps between consecutive merged captures arriving at the
data manager against the ideal 1/rate reference. While the offered load
(devices x rate x record size) stays under the pipe capacity the gaps track
the reference; past it the pipe backlog grows and gaps stretch to the
service time, which is the buffering knee the sweep demonstrates.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from ..sim import NetworkConfig, NoiseConfig, ScenarioConfig, run_session
from .report import write_csv, write_json


def sweep_base(image_payload_bytes: int = 160 * 1024) -> ScenarioConfig:
    return ScenarioConfig(
        name="freq_sweep",
        camera_count=4,
        duration_s=3.0,
        image_width=64, image_height=48, focal_px=60.0,
        payload_kind="image",
        image_payload_bytes=image_payload_bytes,
        buffer_depth=100_000,
        watermark_timeout_s=10.0,   # complete merges only; gaps stay clean
        noise=NoiseConfig(),
        network=NetworkConfig(hop_latency_ms=2.0, data_latency_ms=2.0),
    )


@dataclass
class SweepRow:
    rate_hz: float
    devices: int
    bandwidth_Bps: float
    seed: int
    mean_gap_s: float
    std_gap_s: float
    reference_s: float
    offered_Bps: float
    overloaded: bool
    max_backlog_bytes: int
    buffer_drops: int


def run_frequency_sweep(rates_hz=(5.0, 10.0, 15.0),
                        device_counts=(2, 4),
                        bandwidth_Bps=8_000_000.0,
                        seeds=(0,),
                        base: ScenarioConfig | None = None,
                        duration_s: float | None = None,
                        out_dir=None,
                        work_dir=None) -> list[SweepRow]:
    if bandwidth_Bps is not None and bandwidth_Bps <= 0:
        raise ValueError("bandwidth cap must be positive")
    base = base or sweep_base()
    import tempfile

    work = work_dir or tempfile.mkdtemp(prefix="freqsweep_")
    rows = []
    for devices in device_counts:
        for rate in rates_hz:
            for seed in seeds:
                net = dataclasses.replace(
                    base.network, data_bandwidth_bytes_per_s=bandwidth_Bps)
                cfg = dataclasses.replace(
                    base, camera_count=devices, trigger_rate_hz=rate,
                    duration_s=duration_s or base.duration_s, network=net)
                res = run_session(cfg, seed,
                                  f"{work}/r{rate:g}_d{devices}_s{seed}")
                gaps = res.emission_gaps_s
                record_bytes = _record_bytes(cfg)
                offered = devices * rate * record_bytes
                rows.append(SweepRow(
                    rate_hz=rate, devices=devices, bandwidth_Bps=bandwidth_Bps,
                    seed=seed,
                    mean_gap_s=float(np.mean(gaps)) if len(gaps) else float("nan"),
                    std_gap_s=float(np.std(gaps)) if len(gaps) else float("nan"),
                    reference_s=1.0 / rate,
                    offered_Bps=offered,
                    overloaded=bandwidth_Bps is not None and offered > bandwidth_Bps,
                    max_backlog_bytes=res.pipe_stats.max_backlog_bytes,
                    buffer_drops=res.buffer_drops,
                ))
    if out_dir is not None:
        write_csv(f"{out_dir}/frequency_sweep.csv",
                  ["rate_hz", "devices", "bandwidth_Bps", "seed", "mean_gap_s",
                   "std_gap_s", "reference_s", "offered_Bps", "overloaded",
                   "max_backlog_bytes", "buffer_drops"],
                  [dataclasses.astuple(r) for r in rows])
    return rows


def _record_bytes(cfg: ScenarioConfig) -> int:
    from ..dataplane.framing import FRAME_OVERHEAD
    from ..dataplane.record import record_size

    return record_size(cfg.image_payload_bytes) + FRAME_OVERHEAD


def transport_model_comparison(capacity_Bps: float, offered_Bps: float,
                               per_request_overhead_s: float = 0.010,
                               request_timeout_s: float = 1.0,
                               record_bytes: int = 160 * 1024) -> dict:
    """MODEL ONLY: persistent-stream vs per-request transfer under load.

    A persistent stream delivers min(offered, capacity). A per-request
    transport pays connection overhead per record and, once requests start
    timing out, retries multiply the offered load; delivered goodput
    collapses instead of saturating. This reproduces the direction of the
    socket-vs-HTTP comparison without claiming hardware-bound numbers.
    """
    stream_goodput = min(offered_Bps, capacity_Bps)
    rate = offered_Bps / record_bytes
    service_s = record_bytes / capacity_Bps + per_request_overhead_s
    utilization = rate * service_s
    if utilization <= 1.0:
        request_goodput = offered_Bps
        timeout_fraction = 0.0
    else:
        # saturated server: queue grows, the tail times out and retries
        served_rate = 1.0 / service_s
        timeout_fraction = 1.0 - served_rate / rate
        retry_inflation = 1.0 + timeout_fraction
        served_effective = served_rate / retry_inflation
        request_goodput = served_effective * record_bytes
    return {
        "label": "MODEL",
        "stream_goodput_Bps": stream_goodput,
        "per_request_goodput_Bps": request_goodput,
        "per_request_timeout_fraction": timeout_fraction,
        "stream_delivered_fraction": stream_goodput / offered_Bps,
        "per_request_delivered_fraction": request_goodput / offered_Bps,
    }
