import numpy as np
import pytest

from mvcap.dataplane import (
    CaptureRecord,
    CaptureStore,
    MergedCapture,
    PayloadKind,
    RecordVerifier,
    RejectReason,
    encode_joints2d,
    trigger_dirname,
)
from mvcap.errors import DuplicateTrigger
from mvcap.geometry import Intrinsics, Pose, Skeleton2D

INTR = Intrinsics(500.0, 500.0, 320.0, 240.0, 640, 480)


def joints_payload(m=25):
    return encode_joints2d(Skeleton2D(np.zeros((m, 2)), np.ones(m)))


def rec(device=0, trigger=0, t_ns=1000, pose=None, kind=PayloadKind.JOINTS2D,
        payload=None, crc=-1):
    return CaptureRecord(device, trigger, t_ns, pose or Pose.identity(), INTR,
                         kind, joints_payload() if payload is None else payload,
                         crc)


def test_well_formed_record_verifies():
    v = RecordVerifier()
    assert v.verify(rec())
    assert v.accepted == 1


def test_reflection_pose_rejected():
    R = np.diag([1.0, 1.0, -1.0])  # determinant -1
    v = RecordVerifier()
    verdict = v.verify(rec(pose=Pose(R, np.zeros(3))))
    assert not verdict
    assert verdict.reason is RejectReason.BAD_POSE
    assert v.rejections["bad_pose"] == 1


def test_wrong_joint_count_rejected():
    v = RecordVerifier()
    verdict = v.verify(rec(payload=joints_payload(24)))
    assert verdict.reason is RejectReason.BAD_PAYLOAD


def test_checksum_recheck_rejects_tampered_record():
    r = rec()
    flipped = bytes([r.payload[0] ^ 0x5A]) + r.payload[1:]
    tampered = CaptureRecord(r.device_id, r.trigger_id, r.capture_time_ns,
                             r.pose, r.intrinsics, r.payload_kind,
                             flipped, r.payload_checksum)
    verdict = RecordVerifier().verify(tampered)
    assert verdict.reason is RejectReason.BAD_CHECKSUM


def test_non_monotonic_capture_time_rejected_per_device():
    v = RecordVerifier()
    assert v.verify(rec(device=1, trigger=0, t_ns=2000))
    verdict = v.verify(rec(device=1, trigger=1, t_ns=1500))
    assert verdict.reason is RejectReason.NON_MONOTONIC_TIME
    # other devices keep their own timeline
    assert v.verify(rec(device=2, trigger=1, t_ns=100))


def test_mangled_silhouette_rejected():
    v = RecordVerifier()
    verdict = v.verify(rec(kind=PayloadKind.SILHOUETTE, payload=b"\x01\x02"))
    assert verdict.reason is RejectReason.BAD_PAYLOAD


def test_store_layout_and_manifest(tmp_path):
    store = CaptureStore(tmp_path / "records")
    records = {d: rec(device=d, trigger=5, t_ns=1000 + d) for d in range(6)}
    paths = store.persist(MergedCapture(5, records, 6))
    assert len(paths) == 6
    tdir = tmp_path / "records" / trigger_dirname(5)
    assert (tdir / "manifest.json").exists()
    assert sorted(p.name for p in paths) == [
        f"device_{d:02d}.joints2d.bin" for d in range(6)
    ]
    entries = list(store.iter_manifest())
    assert len(entries) == 1
    assert entries[0]["trigger_id"] == 5
    assert entries[0]["completeness"] == 1.0
    assert len(entries[0]["records"]) == 6
    got = store.load_payload(5, "device_03.joints2d.bin")
    assert got == records[3].payload


def test_store_rejects_duplicate_trigger(tmp_path):
    store = CaptureStore(tmp_path)
    store.persist(MergedCapture(5, {0: rec(trigger=5)}, 1))
    with pytest.raises(DuplicateTrigger):
        store.persist(MergedCapture(5, {0: rec(trigger=5)}, 1))


def test_store_312_trigger_session(tmp_path):
    store = CaptureStore(tmp_path)
    for t in range(312):
        store.persist(MergedCapture(t, {0: rec(trigger=t, t_ns=t + 1)}, 1))
    dirs = [p for p in (tmp_path).iterdir() if p.is_dir()]
    assert len(dirs) == 312
    assert store.trigger_ids() == list(range(312))
