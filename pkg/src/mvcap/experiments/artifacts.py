"""Reading back session artifact directories for analysis stages.

Every artifact embeds the hash of the config that produced it; loaders
recompute the hash and refuse mismatched or tampered inputs, and callers
holding an expected hash can pin it explicitly.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from ..dataplane import CaptureStore, PayloadKind, decode_joints2d, decode_silhouette
from ..errors import ConfigMismatch
from ..geometry import BaCameraParams, CameraView, Intrinsics, Pose, Skeleton2D
from ..sim.scenario import ScenarioConfig, config_hash


class SessionArtifacts:
    def __init__(self, path, expected_hash: str | None = None):
        self.path = Path(path)
        meta = json.loads((self.path / "config.json").read_text())
        self.config = ScenarioConfig.from_dict(meta["config"])
        self.seed = meta["seed"]
        self.config_hash = meta["config_hash"]
        self.joint_count = meta["joint_count"]
        self.hip_joint = meta["hip_joint"]
        self.trigger_count = meta["trigger_count"]
        recomputed = config_hash(self.config)
        if recomputed != self.config_hash:
            raise ConfigMismatch(
                f"artifact hash {self.config_hash} != recomputed {recomputed}")
        if expected_hash is not None and expected_hash != self.config_hash:
            raise ConfigMismatch(
                f"artifact hash {self.config_hash} != expected {expected_hash}")
        self.store = CaptureStore(self.path / "records")
        self._manifest = {e["trigger_id"]: e for e in self.store.iter_manifest()}
        self._observations = None
        self._actor_truth = None

    def trigger_ids(self) -> list[int]:
        return sorted(self._manifest)

    def cameras_for(self, trigger_id: int) -> dict[int, BaCameraParams]:
        """Camera blocks from the recorded (estimated) poses."""
        out = {}
        for entry in self._manifest[trigger_id]["records"]:
            pose = Pose.from_matrix(np.array(entry["pose"]).reshape(3, 4))
            intr = Intrinsics.from_vector(entry["intrinsics"])
            d = entry["device_id"]
            out[d] = BaCameraParams(CameraView(intr, pose, d))
        return out

    def recorded_joints_for(self, trigger_id: int) -> dict[int, Skeleton2D]:
        """2D joints carried in the records (JOINTS2D sessions)."""
        out = {}
        for entry in self._manifest[trigger_id]["records"]:
            if entry["payload_kind"] != "JOINTS2D":
                continue
            data = self.store.load_payload(trigger_id, entry["payload_file"])
            out[entry["device_id"]] = decode_joints2d(
                data, trigger_id, entry["device_id"])
        return out

    def silhouettes_for(self, trigger_id: int) -> dict[int, np.ndarray]:
        out = {}
        for entry in self._manifest[trigger_id]["records"]:
            if entry["payload_kind"] != "SILHOUETTE":
                continue
            data = self.store.load_payload(trigger_id, entry["payload_file"])
            out[entry["device_id"]] = decode_silhouette(data)
        return out

    # -- simulator sidecar (ground truth + clean observations) ---------------

    def _load_observations(self):
        if self._observations is not None:
            return
        self._observations = {}
        path = self.path / "truth" / "devices.jsonl"
        for line in path.read_text().splitlines():
            row = json.loads(line)
            arr = np.array([[np.nan if v is None else v for v in joint]
                            for joint in row["observed_joints"]])
            skel = Skeleton2D(arr[:, :2], np.nan_to_num(arr[:, 2]),
                              row["trigger_id"], row["device_id"])
            self._observations[(row["trigger_id"], row["device_id"])] = skel

    def sidecar_joints_for(self, trigger_id: int) -> dict[int, Skeleton2D]:
        """Observed joints exported by the simulator (any payload kind)."""
        self._load_observations()
        return {d: s for (t, d), s in self._observations.items()
                if t == trigger_id}

    def joints_for(self, trigger_id: int) -> tuple[dict[int, Skeleton2D], str]:
        """Records when they carry joints, the sidecar otherwise."""
        recorded = self.recorded_joints_for(trigger_id)
        if recorded:
            return recorded, "records"
        return self.sidecar_joints_for(trigger_id), "sidecar"

    def actor_truth(self) -> dict[int, np.ndarray]:
        if self._actor_truth is None:
            self._actor_truth = {}
            path = self.path / "truth" / "actor.jsonl"
            for line in path.read_text().splitlines():
                row = json.loads(line)
                self._actor_truth[row["trigger_id"]] = np.array(row["joints"])
        return self._actor_truth
