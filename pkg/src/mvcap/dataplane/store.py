"""Directory-backed capture store.

One directory per trigger id holding each device's payload file plus a
``manifest.json`` with poses, intrinsics, capture times and completeness;
a session-level ``manifest.jsonl`` gets one line per persisted capture so
downstream tools can stream it in emission order.
"""

from __future__ import annotations

import json
import os
from pathlib import Path

from ..errors import DuplicateTrigger, IoFailure
from .merge import MergedCapture
from .payloads import PayloadKind

SESSION_MANIFEST = "manifest.jsonl"

_EXT = {
    PayloadKind.IMAGE: "image.bin",
    PayloadKind.JOINTS2D: "joints2d.bin",
    PayloadKind.SILHOUETTE: "silhouette.bin",
}


def trigger_dirname(trigger_id: int) -> str:
    return f"trigger_{trigger_id:06d}"


def _record_entry(record) -> dict:
    return {
        "device_id": record.device_id,
        "trigger_id": record.trigger_id,
        "capture_time_ns": record.capture_time_ns,
        "pose": [float(v) for v in record.pose.as_matrix().ravel()],
        "intrinsics": [float(v) for v in record.intrinsics.as_vector()],
        "payload_kind": record.payload_kind.name,
        "payload_file": f"device_{record.device_id:02d}.{_EXT[record.payload_kind]}",
        "payload_len": len(record.payload),
        "payload_crc32": record.payload_checksum,
    }


class CaptureStore:
    def __init__(self, root):
        self.root = Path(root)
        try:
            self.root.mkdir(parents=True, exist_ok=True)
        except OSError as e:
            raise IoFailure(str(e)) from e
        self._persisted: set[int] = set()
        for entry in self.iter_manifest():
            self._persisted.add(entry["trigger_id"])

    def persist(self, merged: MergedCapture) -> list[Path]:
        """Write one merged capture; a second persist of the same id errors."""
        t = merged.trigger_id
        tdir = self.root / trigger_dirname(t)
        if t in self._persisted or tdir.exists():
            raise DuplicateTrigger(f"trigger {t} already persisted")
        try:
            tdir.mkdir(parents=True)
            paths = []
            entries = []
            for device_id in sorted(merged.records):
                record = merged.records[device_id]
                entry = _record_entry(record)
                path = tdir / entry["payload_file"]
                path.write_bytes(record.payload)
                paths.append(path)
                entries.append(entry)
            manifest = {
                "trigger_id": t,
                "completeness": merged.completeness,
                "expected_devices": merged.expected_devices,
                "records": entries,
            }
            (tdir / "manifest.json").write_text(
                json.dumps(manifest, sort_keys=True, indent=1))
            with open(self.root / SESSION_MANIFEST, "a") as fh:
                fh.write(json.dumps(manifest, sort_keys=True) + "\n")
        except OSError as e:
            raise IoFailure(str(e)) from e
        self._persisted.add(t)
        return paths

    def iter_manifest(self):
        path = self.root / SESSION_MANIFEST
        if not path.exists():
            return
        with open(path) as fh:
            for line in fh:
                if line.strip():
                    yield json.loads(line)

    def trigger_ids(self) -> list[int]:
        return [entry["trigger_id"] for entry in self.iter_manifest()]

    def load_payload(self, trigger_id: int, payload_file: str) -> bytes:
        return (self.root / trigger_dirname(trigger_id) / payload_file).read_bytes()
