import time

import numpy as np
import pytest

from mvcap.dataplane import (
    CaptureRecord,
    PayloadKind,
    decode_joints2d,
    decode_silhouette,
    deserialize_record,
    encode_joints2d,
    encode_silhouette,
    serialize_record,
)
from mvcap.dataplane.record import HEADER_SIZE, record_size
from mvcap.errors import BadMagic, ChecksumMismatch, PayloadTooLarge, TruncatedInput
from mvcap.geometry import Intrinsics, Pose, Skeleton2D

from helpers import random_rotation

INTR = Intrinsics(500.0, 500.0, 320.0, 240.0, 640, 480)


def make_record(device=3, trigger=17, payload=b"hello world",
                kind=PayloadKind.IMAGE, pose=None, t_ns=123_456_789):
    return CaptureRecord(device, trigger, t_ns, pose or Pose.identity(),
                         INTR, kind, payload)


def random_record(rng):
    pose = Pose(random_rotation(rng), rng.normal(size=3))
    payload = rng.bytes(int(rng.integers(0, 2000)))
    kinds = list(PayloadKind)
    return CaptureRecord(
        device_id=int(rng.integers(0, 64)),
        trigger_id=int(rng.integers(0, 1 << 31)),
        capture_time_ns=int(rng.integers(-(1 << 40), 1 << 60)),
        pose=pose,
        intrinsics=INTR,
        payload_kind=kinds[int(rng.integers(len(kinds)))],
        payload=payload,
    )


def assert_records_equal(a, b):
    assert a.device_id == b.device_id
    assert a.trigger_id == b.trigger_id
    assert a.capture_time_ns == b.capture_time_ns
    assert a.payload_kind == b.payload_kind
    assert a.payload == b.payload
    assert a.payload_checksum == b.payload_checksum
    assert a.pose.as_matrix().tobytes() == b.pose.as_matrix().tobytes()
    assert a.intrinsics == b.intrinsics


def test_empty_payload_round_trip_is_header_only():
    r = make_record(payload=b"")
    raw = serialize_record(r)
    assert len(raw) == HEADER_SIZE + 4
    assert_records_equal(deserialize_record(raw), r)


def test_160kb_payload_size_arithmetic():
    payload = bytes(160 * 1024)
    raw = serialize_record(make_record(payload=payload))
    assert len(raw) == record_size(160 * 1024)
    assert len(raw) == HEADER_SIZE + 160 * 1024 + 4


def test_corrupted_payload_byte_fails_checksum():
    raw = bytearray(serialize_record(make_record(payload=b"abcdef")))
    raw[HEADER_SIZE + 2] ^= 0xFF
    with pytest.raises(ChecksumMismatch):
        deserialize_record(bytes(raw))


def test_truncated_and_bad_magic():
    raw = serialize_record(make_record())
    with pytest.raises(TruncatedInput):
        deserialize_record(raw[:40])
    with pytest.raises(TruncatedInput):
        deserialize_record(raw[:-3])
    with pytest.raises(BadMagic):
        deserialize_record(b"XXXX" + raw[4:])


def test_payload_size_guard():
    with pytest.raises(PayloadTooLarge):
        serialize_record(make_record(payload=bytes(16 * 1024 * 1024 + 1)))


def test_round_trip_10k_randomized_records():
    rng = np.random.default_rng(123)
    for _ in range(10_000):
        r = random_record(rng)
        assert_records_equal(deserialize_record(serialize_record(r)), r)


def test_deserialize_throughput_floor():
    # decode rate must comfortably exceed 1000 records/s on one core
    raw = serialize_record(make_record(payload=bytes(1000)))
    n = 2000
    t0 = time.perf_counter()
    for _ in range(n):
        deserialize_record(raw)
    rate = n / (time.perf_counter() - t0)
    assert rate > 1000


def test_joints2d_payload_round_trip_with_missing():
    joints = np.array([[1.5, 2.5], [np.nan, np.nan], [100.0, 200.0]])
    conf = np.array([0.9, 0.0, 0.5])
    skel = Skeleton2D(joints, conf, camera_id=2)
    back = decode_joints2d(encode_joints2d(skel), camera_id=2)
    assert back.joint_count == 3
    assert list(back.present) == [True, False, True]
    assert np.allclose(back.joints[back.present],
                       joints[[0, 2]], atol=1e-6)
    assert np.allclose(back.confidence, conf, atol=1e-7)


def test_silhouette_round_trip():
    rng = np.random.default_rng(5)
    for _ in range(20):
        mask = rng.random((24, 31)) < 0.3
        assert np.array_equal(decode_silhouette(encode_silhouette(mask)), mask)
    # all-true and all-false edge cases
    assert np.array_equal(
        decode_silhouette(encode_silhouette(np.ones((4, 4), bool))),
        np.ones((4, 4), bool))
    assert np.array_equal(
        decode_silhouette(encode_silhouette(np.zeros((4, 4), bool))),
        np.zeros((4, 4), bool))
