"""Declarative scenario configuration for simulated capture sessions.

A scenario fixes the rig (cameras, resolution, motion), the actor, the
noise profile, the network, and the synchronization scheme. Configs are
plain JSON on disk; the resolved config's canonical hash is embedded in
every artifact a session produces so downstream stages can refuse
mismatched inputs.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

from ..sync import SyncScheme, SyncVariant


@dataclass(frozen=True)
class NoiseConfig:
    pixel_sigma_px: float = 0.0
    miss_rate: float = 0.0
    affected_cameras: int | None = None     # None: misses can hit any camera
    pose_rot_walk_deg: float = 0.0
    pose_trans_walk_m: float = 0.0
    clock_offset_range_ms: tuple = (0.0, 0.0)
    clock_drift_range_ppm: tuple = (0.0, 0.0)
    capture_jitter_ms: float = 0.0          # device-side frame-grab jitter


@dataclass(frozen=True)
class NetworkConfig:
    # trigger path: per-hop figures (device <-> relay)
    hop_latency_ms: float = 5.0
    hop_jitter_ms: float = 0.0
    jitter_dist: str = "lognormal"          # or "normal"
    trigger_loss_p: float = 0.0
    client_latency_spread_ms: float = 0.0   # one-way asymmetry across clients
    # data plane: devices -> manager through a shared capped pipe
    data_latency_ms: float = 5.0
    data_bandwidth_bytes_per_s: float | None = None


@dataclass(frozen=True)
class ScenarioConfig:
    name: str = "custom"
    camera_count: int = 6
    ring_radius_m: float = 4.0
    camera_height_m: float = 1.2
    focal_px: float = 500.0
    image_width: int = 640
    image_height: int = 480
    moving_cameras: tuple = ()
    shake_amplitude_m: float = 0.0
    trigger_rate_hz: float = 10.0
    duration_s: float = 3.0
    scheme: str = "trigger_relay"           # trigger_relay|ntp_baseline|ntp_averaged
    compensation: bool = True               # False: no-compensation baseline
    rtt_samples: int = 20
    payload_kind: str = "joints2d"          # image|joints2d|silhouette
    image_payload_bytes: int = 160 * 1024
    stream_payloads: bool = True
    buffer_depth: int = 4096
    watermark_timeout_s: float = 0.5
    actor_motion_hz: float = 0.5
    noise: NoiseConfig = field(default_factory=NoiseConfig)
    network: NetworkConfig = field(default_factory=NetworkConfig)

    def sync_scheme(self) -> SyncScheme:
        v = SyncVariant(self.scheme)
        if v is SyncVariant.NTP_AVERAGED:
            return SyncScheme.ntp_averaged()
        if v is SyncVariant.NTP_BASELINE:
            return SyncScheme.ntp_baseline()
        return SyncScheme.trigger_relay()

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "ScenarioConfig":
        data = dict(data)
        noise = NoiseConfig(**_tupled(data.pop("noise", {}),
                                      ("clock_offset_range_ms",
                                       "clock_drift_range_ppm")))
        network = NetworkConfig(**data.pop("network", {}))
        return cls(noise=noise, network=network,
                   **_tupled(data, ("moving_cameras",)))

    @classmethod
    def from_json(cls, path) -> "ScenarioConfig":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def write_json(self, path) -> None:
        Path(path).write_text(canonical_json(self.to_dict()) + "\n")


def _tupled(data: dict, keys) -> dict:
    out = dict(data)
    for k in keys:
        if k in out and isinstance(out[k], list):
            out[k] = tuple(out[k])
    return out


def canonical_json(data) -> str:
    return json.dumps(data, sort_keys=True, separators=(",", ":"))


def config_hash(config: ScenarioConfig | dict) -> str:
    data = config.to_dict() if isinstance(config, ScenarioConfig) else config
    return hashlib.sha256(canonical_json(data).encode()).hexdigest()[:16]


# Presets mirror the reference rig: six devices on a ~4 m ring at 640x480,
# 10 Hz triggers, ~300 triggers per run; the tiers toggle camera motion and
# handheld shake and scale the detector/pose noise.

def preset(name: str) -> ScenarioConfig:
    base = dict(
        camera_count=6,
        trigger_rate_hz=10.0,
        noise=NoiseConfig(
            pixel_sigma_px=1.0,
            pose_rot_walk_deg=0.03,
            pose_trans_walk_m=0.001,
            clock_offset_range_ms=(-50.0, 50.0),
            clock_drift_range_ppm=(-20.0, 20.0),
            capture_jitter_ms=2.0,
        ),
        network=NetworkConfig(hop_latency_ms=5.0, hop_jitter_ms=1.0),
    )
    if name == "easy":
        return ScenarioConfig(name="easy", duration_s=31.1, **base)
    if name == "medium":
        base["noise"] = dataclasses.replace(base["noise"], pixel_sigma_px=1.5)
        return ScenarioConfig(name="medium", duration_s=29.0,
                              moving_cameras=(1, 3, 5), **base)
    if name == "hard":
        base["noise"] = dataclasses.replace(
            base["noise"], pixel_sigma_px=2.0, miss_rate=0.05,
            pose_rot_walk_deg=0.06)
        return ScenarioConfig(name="hard", duration_s=32.8,
                              moving_cameras=(0, 1, 2, 3, 4, 5),
                              shake_amplitude_m=0.03, **base)
    raise ValueError(f"unknown preset {name!r}")


def load_scenario(spec: str | Path) -> ScenarioConfig:
    """A preset name or a path to a scenario JSON file."""
    if isinstance(spec, (str, Path)) and str(spec) in ("easy", "medium", "hard"):
        return preset(str(spec))
    return ScenarioConfig.from_json(spec)
