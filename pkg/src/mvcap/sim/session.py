"""End-to-end simulated capture session.

Wires simulated devices, the relay core, the network models and the data
manager onto one discrete-event timeline: RTT probing (or NTP alignment),
trigger fan-out, per-device captures with detector/pose/clock noise, framed
streaming through a capacity-capped pipe, then verification, merging and
persistence. Ground truth (true capture instants, true poses, clean
observations) is exported next to the records so experiments can score the
system against an oracle.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..dataplane import (
    CaptureRecord,
    CaptureStore,
    FrameDecoder,
    PayloadKind,
    RecordVerifier,
    StreamBuffer,
    TriggerMerger,
    deserialize_record,
    encode_frame,
    encode_joints2d,
    encode_silhouette,
    serialize_record,
)
from ..dataplane.record import MAGIC as RECORD_MAGIC
from ..geometry import CameraView, Intrinsics
from ..relay import Kind, RelayCore, RelayDatagram
from ..sync import SyncVariant, compensation_plan, estimate_ntp_offset
from .actor import ActorModel, exercise_script
from .cameras import PoseNoiseWalk, ring_trajectories
from .clock import DeviceClock, random_clock
from .events import EventLoop
from .network import LOST, LinkModel, ReliablePipe
from .observe import observe_joints, render_actor_silhouette
from .scenario import ScenarioConfig, canonical_json, config_hash

RELAY = "relay"
PROBE_SPACING_S = 0.004
PROBE_TIMEOUT_S = 0.5
START_MARGIN_S = 0.05


class SimNet:
    """Named-endpoint datagram transport over per-direction link models."""

    def __init__(self, loop: EventLoop):
        self.loop = loop
        self._links: dict[tuple, tuple[LinkModel, object]] = {}
        self._handlers: dict[object, object] = {}
        self.lost = 0

    def link(self, src, dst, model: LinkModel, rng) -> None:
        self._links[(src, dst)] = (model, rng)

    def register(self, endpoint, handler) -> None:
        self._handlers[endpoint] = handler

    def send(self, src, dst, data: bytes) -> None:
        model, rng = self._links[(src, dst)]
        at = model.deliver(self.loop.now, rng)
        if at is LOST:
            self.lost += 1
            return
        self.loop.schedule(at, self._handlers[dst], data, src)


@dataclass
class _TruthRow:
    trigger_id: int
    device_id: int
    true_capture_s: float
    device_clock_ns: int
    true_pose: np.ndarray
    recorded_pose: np.ndarray
    observed: object  # Skeleton2D


@dataclass
class SessionResult:
    out_dir: Path
    config: ScenarioConfig
    seed: int
    config_hash: str
    trigger_count: int
    spreads_ms: dict           # trigger_id -> true capture spread (ms)
    captured: dict             # trigger_id -> device count that captured
    emitted: list              # (trigger_id, emit_time_s, completeness)
    relay_drops: dict
    net_lost: int
    buffer_drops: int
    pipe_stats: object
    verifier_rejections: dict
    duplicates: int

    @property
    def mean_spread_ms(self) -> float:
        vals = [v for v in self.spreads_ms.values() if np.isfinite(v)]
        return float(np.mean(vals)) if vals else float("nan")

    @property
    def std_spread_ms(self) -> float:
        vals = [v for v in self.spreads_ms.values() if np.isfinite(v)]
        return float(np.std(vals)) if vals else float("nan")

    @property
    def mean_completeness(self) -> float:
        if not self.emitted:
            return 0.0
        per = {t: c for t, _, c in self.emitted}
        total = sum(per.get(t, 0.0) for t in range(self.trigger_count))
        return total / self.trigger_count

    @property
    def emission_gaps_s(self) -> np.ndarray:
        times = [e for _, e, _ in self.emitted]
        return np.diff(times) if len(times) > 1 else np.array([])


class SessionRunner:
    def __init__(self, config: ScenarioConfig, seed: int, out_dir):
        self.config = config
        self.seed = seed
        self.out_dir = Path(out_dir)
        self.hash = config_hash(config)

        c = config.camera_count
        root = np.random.SeedSequence([seed, 0x5E55])
        kids = root.spawn(5 + 3 * c)
        self.rng_clock = np.random.default_rng(kids[0])
        self.rng_net = np.random.default_rng(kids[1])
        self.rng_pipe = np.random.default_rng(kids[2])
        self.rng_ntp = np.random.default_rng(kids[3])
        self.rng_misc = np.random.default_rng(kids[4])
        self.rng_walk = [np.random.default_rng(kids[5 + d]) for d in range(c)]
        self.rng_obs = [np.random.default_rng(kids[5 + c + d]) for d in range(c)]
        self.rng_jit = [np.random.default_rng(kids[5 + 2 * c + d]) for d in range(c)]

        self.loop = EventLoop()
        self.actor = ActorModel(script=exercise_script(config.actor_motion_hz))
        self.intr = Intrinsics(config.focal_px, config.focal_px,
                               config.image_width / 2.0, config.image_height / 2.0,
                               config.image_width, config.image_height)
        self.trajectories = ring_trajectories(
            c, config.ring_radius_m, config.camera_height_m,
            moving=set(config.moving_cameras),
            shake_amplitude_m=config.shake_amplitude_m,
            rng=self.rng_misc)
        self.clocks = [random_clock(self.rng_clock,
                                    config.noise.clock_offset_range_ms,
                                    config.noise.clock_drift_range_ppm)
                       for _ in range(c)]
        self.walks = [PoseNoiseWalk(config.noise.pose_rot_walk_deg,
                                    config.noise.pose_trans_walk_m,
                                    self.rng_walk[d]) for d in range(c)]

        self.scheme = config.sync_scheme()
        self.trigger_count = int(np.floor(config.duration_s
                                          * config.trigger_rate_hz + 1e-9)) + 1

        # truth/metrics accumulators
        self.truth_rows: dict[tuple[int, int], _TruthRow] = {}
        self.nominal: dict[int, float] = {}
        self.actor_truth: dict[int, np.ndarray] = {}
        self.emitted: list = []

        self._build_network()
        self._build_dataplane()

    # -- wiring ---------------------------------------------------------------

    def _client_hop_latency_s(self, device: int) -> float:
        net = self.config.network
        base = net.hop_latency_ms / 1e3
        a = device - 1
        spread = net.client_latency_spread_ms / 1e3
        denom = max(self.config.camera_count - 2, 1)
        return base + spread * a / denom

    def _build_network(self) -> None:
        cfg = self.config
        net_cfg = cfg.network
        self.net = SimNet(self.loop)
        self.relay = RelayCore()
        jitter = net_cfg.hop_jitter_ms / 1e3

        def hop(base_s, loss=0.0):
            return LinkModel(base_s, jitter, loss, net_cfg.jitter_dist)

        host_hop = net_cfg.hop_latency_ms / 1e3
        self.net.link(0, RELAY, hop(host_hop), self.rng_net)
        self.net.link(RELAY, 0, hop(host_hop), self.rng_net)
        for d in range(1, cfg.camera_count):
            base = self._client_hop_latency_s(d)
            self.net.link(RELAY, d, hop(base, net_cfg.trigger_loss_p), self.rng_net)
            self.net.link(d, RELAY, hop(base), self.rng_net)

        self.net.register(RELAY, self._on_relay_datagram)
        for d in range(cfg.camera_count):
            self.net.register(d, _bind_device(self._on_device_datagram, d))
        self._last_trigger = [-1] * cfg.camera_count

        self.session_id = self.relay.register_session(0)
        for d in range(1, cfg.camera_count):
            self.relay.join_session(self.session_id, d)
        self.relay.begin_capture(self.session_id)

    def _build_dataplane(self) -> None:
        cfg = self.config
        self.store = CaptureStore(self.out_dir / "records")
        self.verifier = RecordVerifier(self.actor.joint_count)
        self.merger = TriggerMerger(list(range(cfg.camera_count)),
                                    cfg.watermark_timeout_s)
        self.pipe = ReliablePipe(self.loop, cfg.network.data_bandwidth_bytes_per_s,
                                 cfg.network.data_latency_ms / 1e3,
                                 rng=self.rng_pipe)
        self.buffers = [StreamBuffer(cfg.buffer_depth)
                        for _ in range(cfg.camera_count)]
        self._busy = [False] * cfg.camera_count
        self.decoders = {d: FrameDecoder(body_prefix=RECORD_MAGIC)
                         for d in range(cfg.camera_count)}
        self.decode_failures = 0

    # -- relay / datagram handlers --------------------------------------------

    def _on_relay_datagram(self, data: bytes, source) -> None:
        for dst, payload in self.relay.handle(data, source):
            self.net.send(RELAY, dst, payload)

    def _on_device_datagram(self, device: int, data: bytes, source) -> None:
        dgram = RelayDatagram.decode(data)
        if dgram.kind is Kind.TRIGGER:
            self._on_client_trigger(device, dgram)
        elif dgram.kind is Kind.RTT_PROBE:
            # reflect immediately with the original timestamp
            echo = RelayDatagram(Kind.RTT_ECHO, dgram.session_id,
                                 dgram.counter, dgram.timestamp_ns)
            self.net.send(device, RELAY, echo.encode())
        elif dgram.kind is Kind.RTT_ECHO:
            self._on_probe_echo(dgram)

    def _on_client_trigger(self, device: int, dgram: RelayDatagram) -> None:
        # acceptance is monotonic: late lower ids are dropped, never reordered
        if dgram.counter <= self._last_trigger[device]:
            return
        self._last_trigger[device] = dgram.counter
        clock = self.clocks[device]
        local = clock.device_time(self.loop.now)
        if self.config.compensation:
            local = local + self.plan.delay_for(device - 1) / 1e3
        self._schedule_capture(device, dgram.counter, clock.true_time(local))

    # -- RTT probing phase -----------------------------------------------------

    def _start_probing(self) -> None:
        self._samples = {a: [] for a in range(self.config.camera_count - 1)}
        self._probe_done = False
        for a in self._samples:
            self._send_probe(a)

    def _send_probe(self, client_index: int) -> None:
        ts = self.clocks[0].device_time_ns(self.loop.now)
        probe = RelayDatagram(Kind.RTT_PROBE, self.session_id, client_index, ts)
        self.net.send(0, RELAY, probe.encode())
        count_at_send = len(self._samples[client_index])
        self.loop.schedule(self.loop.now + PROBE_TIMEOUT_S,
                           self._probe_retry, client_index, count_at_send)

    def _probe_retry(self, client_index: int, count_at_send: int) -> None:
        if self._probe_done:
            return
        if len(self._samples[client_index]) == count_at_send:
            self._send_probe(client_index)

    def _on_probe_echo(self, dgram: RelayDatagram) -> None:
        if self._probe_done:
            return
        a = dgram.counter
        now_host = self.clocks[0].device_time_ns(self.loop.now)
        rtt_ms = (now_host - dgram.timestamp_ns) / 1e6
        samples = self._samples[a]
        if len(samples) >= self.config.rtt_samples:
            return
        samples.append(rtt_ms)
        if len(samples) < self.config.rtt_samples:
            self.loop.schedule(self.loop.now + PROBE_SPACING_S,
                               self._send_probe, a)
        elif all(len(s) >= self.config.rtt_samples
                 for s in self._samples.values()):
            self._probe_done = True
            self._finish_probing()

    def _finish_probing(self) -> None:
        means = np.array([float(np.mean(self._samples[a]))
                          for a in sorted(self._samples)])
        self.plan = compensation_plan(means)
        self._schedule_capture_phase(self.loop.now + START_MARGIN_S)

    # -- NTP alignment phase -----------------------------------------------------

    def _ntp_offsets(self) -> list[float]:
        """Per-device estimates of (host clock - device clock), seconds."""
        cfg = self.config
        offsets = [0.0]  # the host is the reference
        jitter = cfg.network.hop_jitter_ms / 1e3
        for d in range(1, cfg.camera_count):
            fwd_model = LinkModel(cfg.network.hop_latency_ms / 1e3, jitter,
                                  0.0, cfg.network.jitter_dist)
            back_model = LinkModel(self._client_hop_latency_s(d), jitter,
                                   0.0, cfg.network.jitter_dist)

            def fwd():
                # host -> relay -> client
                return fwd_model.sample_delay(self.rng_ntp) \
                    + back_model.sample_delay(self.rng_ntp)

            est = estimate_ntp_offset(self.scheme.ntp_request_count,
                                      self.clocks[d], self.clocks[0],
                                      fwd, fwd)
            offsets.append(est)
        return offsets

    # -- capture phase ----------------------------------------------------------

    def _schedule_capture_phase(self, start_true_s: float) -> None:
        cfg = self.config
        host_clock = self.clocks[0]
        h0 = host_clock.device_time(start_true_s)
        self._grid = [h0 + k / cfg.trigger_rate_hz
                      for k in range(self.trigger_count)]
        variant = self.scheme.variant

        if variant is SyncVariant.TRIGGER_RELAY:
            for k, g in enumerate(self._grid):
                self.loop.schedule(host_clock.true_time(g), self._host_send, k)
        else:
            offsets = self._ntp_offsets()
            for k, g in enumerate(self._grid):
                self.nominal[k] = host_clock.true_time(g)
                for d in range(cfg.camera_count):
                    local = g - offsets[d]
                    true_t = self.clocks[d].true_time(local)
                    self._schedule_capture(d, k, true_t)

        end_guess = host_clock.true_time(self._grid[-1]) + 2.0
        t = start_true_s
        while t < end_guess:
            t += cfg.watermark_timeout_s / 2.0
            self.loop.schedule(t, self._flush_merger)

    def _host_send(self, k: int) -> None:
        host_clock = self.clocks[0]
        g = self._grid[k]
        ts = int(round(g * 1e9))
        dgram = RelayDatagram(Kind.TRIGGER, self.session_id, k, ts)
        self.net.send(0, RELAY, dgram.encode())
        if self.config.compensation:
            host_local = g + self.plan.host_delay_ms / 1e3
        else:
            host_local = g
        self.nominal[k] = host_clock.true_time(host_local)
        self._schedule_capture(0, k, host_clock.true_time(host_local))

    def _schedule_capture(self, device: int, trigger_id: int,
                          true_t: float) -> None:
        jitter_ms = self.config.noise.capture_jitter_ms
        if jitter_ms > 0:
            true_t = true_t + self.rng_jit[device].normal(0.0, jitter_ms / 1e3)
        true_t = max(true_t, self.loop.now)
        self.loop.schedule(true_t, self._capture, device, trigger_id)

    def _capture(self, device: int, trigger_id: int) -> None:
        cfg = self.config
        tc = self.loop.now
        truth = self.actor.pose_at(tc)
        true_pose = self.trajectories[device].pose_at(tc)
        recorded_pose = self.walks[device].corrupt(true_pose)
        cam_true = CameraView(self.intr, true_pose, device)

        miss = cfg.noise.miss_rate
        if cfg.noise.affected_cameras is not None \
                and device >= cfg.noise.affected_cameras:
            miss = 0.0
        obs = observe_joints(truth, cam_true, cfg.noise.pixel_sigma_px,
                             miss, self.rng_obs[device])

        kind = PayloadKind[cfg.payload_kind.upper()]
        if kind is PayloadKind.JOINTS2D:
            payload = encode_joints2d(obs)
        elif kind is PayloadKind.SILHOUETTE:
            payload = encode_silhouette(
                render_actor_silhouette(self.actor, tc, cam_true))
        else:
            payload = bytes(cfg.image_payload_bytes)

        record = CaptureRecord(device, trigger_id,
                               self.clocks[device].device_time_ns(tc),
                               recorded_pose, self.intr, kind, payload)
        self.truth_rows[(trigger_id, device)] = _TruthRow(
            trigger_id, device, tc, record.capture_time_ns,
            true_pose.as_matrix(), recorded_pose.as_matrix(), obs)
        if trigger_id not in self.actor_truth:
            nominal = self.nominal.get(trigger_id, tc)
            self.actor_truth[trigger_id] = self.actor.pose_at(nominal).joints

        if cfg.stream_payloads:
            self._offer(device, record)
        else:
            self._ingest(self.merger.push(record, tc))

    # -- streaming into the manager ---------------------------------------------

    def _offer(self, device: int, record: CaptureRecord) -> None:
        self.buffers[device].offer(record)
        self._pump(device)

    def _pump(self, device: int) -> None:
        if self._busy[device]:
            return
        item = self.buffers[device].take_nowait()
        if item is None:
            return
        trigger_id, frame = item
        self._busy[device] = True

        def delivered():
            self._on_manager_bytes(device, frame)

        def sent():
            self._busy[device] = False
            self.buffers[device].acknowledge(trigger_id)
            self._pump(device)

        self.pipe.submit(len(frame), delivered, sent)

    def _on_manager_bytes(self, device: int, data: bytes) -> None:
        for body in self.decoders[device].feed(data):
            try:
                record = deserialize_record(body)
            except Exception:
                self.decode_failures += 1
                continue
            if self.verifier.verify(record):
                self._ingest(self.merger.push(record, self.loop.now))

    def _ingest(self, merged_list) -> None:
        for merged in merged_list:
            self.store.persist(merged)
            self.emitted.append((merged.trigger_id, self.loop.now,
                                 merged.completeness))

    def _flush_merger(self) -> None:
        self._ingest(self.merger.flush(self.loop.now))

    # -- run + artifacts ----------------------------------------------------------

    def run(self) -> SessionResult:
        self.out_dir.mkdir(parents=True, exist_ok=True)
        if self.scheme.variant is SyncVariant.TRIGGER_RELAY:
            if self.config.compensation and self.config.camera_count > 1:
                self._start_probing()
            else:
                zero = np.zeros(max(self.config.camera_count - 1, 1))
                self.plan = compensation_plan(zero)
                self._schedule_capture_phase(START_MARGIN_S)
        else:
            self._schedule_capture_phase(START_MARGIN_S)
        self.loop.run()
        self._ingest(self.merger.finish())
        result = self._result()
        self._write_artifacts(result)
        return result

    def _result(self) -> SessionResult:
        times_by_trigger: dict[int, list[float]] = {}
        for (t, _d), row in self.truth_rows.items():
            times_by_trigger.setdefault(t, []).append(row.true_capture_s)
        spreads = {}
        captured = {}
        for k in range(self.trigger_count):
            times = times_by_trigger.get(k, [])
            captured[k] = len(times)
            spreads[k] = 1e3 * (max(times) - min(times)) if len(times) >= 2 \
                else float("nan")
        return SessionResult(
            out_dir=self.out_dir,
            config=self.config,
            seed=self.seed,
            config_hash=self.hash,
            trigger_count=self.trigger_count,
            spreads_ms=spreads,
            captured=captured,
            emitted=self.emitted,
            relay_drops=dict(self.relay.drops),
            net_lost=self.net.lost,
            buffer_drops=sum(b.dropped_oldest for b in self.buffers),
            pipe_stats=self.pipe.stats,
            verifier_rejections=dict(self.verifier.rejections),
            duplicates=sum(self.merger.duplicates.values()),
        )

    def _write_artifacts(self, result: SessionResult) -> None:
        truth_dir = self.out_dir / "truth"
        truth_dir.mkdir(parents=True, exist_ok=True)
        meta = {"config": self.config.to_dict(), "seed": self.seed,
                "config_hash": self.hash,
                "trigger_count": self.trigger_count,
                "joint_count": self.actor.joint_count,
                "hip_joint": self.actor.hip_joint}
        (self.out_dir / "config.json").write_text(canonical_json(meta) + "\n")

        with open(truth_dir / "actor.jsonl", "w") as fh:
            for k in sorted(self.actor_truth):
                fh.write(canonical_json({
                    "trigger_id": k,
                    "nominal_true_s": self.nominal.get(k),
                    "joints": np.round(self.actor_truth[k], 12).tolist(),
                }) + "\n")

        with open(truth_dir / "devices.jsonl", "w") as fh:
            for key in sorted(self.truth_rows):
                row = self.truth_rows[key]
                obs = np.column_stack([row.observed.joints,
                                       row.observed.confidence])
                fh.write(canonical_json({
                    "trigger_id": row.trigger_id,
                    "device_id": row.device_id,
                    "true_capture_s": row.true_capture_s,
                    "device_clock_ns": row.device_clock_ns,
                    "true_pose": np.round(row.true_pose, 15).ravel().tolist(),
                    "recorded_pose": np.round(row.recorded_pose, 15).ravel().tolist(),
                    "intrinsics": self.intr.as_vector().tolist(),
                    "observed_joints": _jsonable(obs),
                }) + "\n")

        (truth_dir / "clocks.json").write_text(canonical_json(
            [{"device_id": d, "offset_s": c.offset_s, "drift_ppm": c.drift_ppm}
             for d, c in enumerate(self.clocks)]) + "\n")

        with open(self.out_dir / "metrics.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["trigger_id", "captured_devices", "spread_ms",
                        "completeness", "seed", "config_hash"])
            completeness = {t: c for t, _, c in self.emitted}
            for k in range(self.trigger_count):
                s = result.spreads_ms[k]
                w.writerow([k, result.captured[k],
                            repr(s) if np.isfinite(s) else "",
                            repr(completeness.get(k, 0.0)),
                            self.seed, self.hash])

        summary = {
            "config_hash": self.hash,
            "seed": self.seed,
            "scheme": self.config.scheme,
            "compensation": self.config.compensation,
            "trigger_count": self.trigger_count,
            "mean_spread_ms": result.mean_spread_ms,
            "std_spread_ms": result.std_spread_ms,
            "mean_completeness": result.mean_completeness,
            "net_lost": self.net.lost,
            "buffer_drops": result.buffer_drops,
            "verifier_rejections": result.verifier_rejections,
        }
        (self.out_dir / "summary.json").write_text(canonical_json(summary) + "\n")


def _jsonable(arr: np.ndarray):
    out = []
    for row in np.asarray(arr, dtype=float):
        out.append([None if not np.isfinite(v) else float(np.round(v, 9))
                    for v in row])
    return out


def _bind_device(handler, device: int):
    def bound(data, source):
        return handler(device, data, source)
    return bound


def run_session(config: ScenarioConfig, seed: int, out_dir) -> SessionResult:
    return SessionRunner(config, seed, out_dir).run()
