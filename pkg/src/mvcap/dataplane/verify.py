"""Integrity verification stage between decoding and merging.

Rejection is a value, not an exception: the manager counts reasons and
keeps going. Checks: payload checksum, pose rigidity, per-device capture
time monotonicity and payload-kind-specific sanity (a joints payload must
decode to exactly the expected joint count, a silhouette must decode at all).
"""

from __future__ import annotations

import enum
from collections import Counter
from dataclasses import dataclass

from ..geometry.skeleton import DEFAULT_JOINT_COUNT
from .payloads import PayloadKind, decode_joints2d, decode_silhouette
from .record import CaptureRecord

POSE_TOL = 1e-6


class RejectReason(enum.Enum):
    BAD_CHECKSUM = "bad_checksum"
    BAD_POSE = "bad_pose"
    NON_MONOTONIC_TIME = "non_monotonic_time"
    BAD_PAYLOAD = "bad_payload"


@dataclass(frozen=True)
class Verdict:
    accepted: bool
    reason: RejectReason | None = None

    def __bool__(self) -> bool:
        return self.accepted


VERIFIED = Verdict(True)


def check_record(record: CaptureRecord,
                 expected_joints: int = DEFAULT_JOINT_COUNT,
                 last_time_ns: int | None = None) -> Verdict:
    """Stateless record checks; see RecordVerifier for the per-device state."""
    if not record.checksum_ok():
        return Verdict(False, RejectReason.BAD_CHECKSUM)
    if not record.pose.is_rigid(POSE_TOL):
        return Verdict(False, RejectReason.BAD_POSE)
    if last_time_ns is not None and record.capture_time_ns <= last_time_ns:
        return Verdict(False, RejectReason.NON_MONOTONIC_TIME)
    if record.payload_kind is PayloadKind.JOINTS2D:
        try:
            skel = decode_joints2d(record.payload)
        except Exception:
            return Verdict(False, RejectReason.BAD_PAYLOAD)
        if skel.joint_count != expected_joints:
            return Verdict(False, RejectReason.BAD_PAYLOAD)
    elif record.payload_kind is PayloadKind.SILHOUETTE:
        try:
            decode_silhouette(record.payload)
        except Exception:
            return Verdict(False, RejectReason.BAD_PAYLOAD)
    return VERIFIED


class RecordVerifier:
    """Stateful verifier: tracks per-device time monotonicity and counts."""

    def __init__(self, expected_joints: int = DEFAULT_JOINT_COUNT):
        self.expected_joints = expected_joints
        self._last_time: dict[int, int] = {}
        self.rejections = Counter()
        self.accepted = 0

    def verify(self, record: CaptureRecord) -> Verdict:
        verdict = check_record(record, self.expected_joints,
                               self._last_time.get(record.device_id))
        if verdict:
            self._last_time[record.device_id] = record.capture_time_ns
            self.accepted += 1
        else:
            self.rejections[verdict.reason.value] += 1
        return verdict
