"""Capture record container and its deterministic binary layout.

Field order on the wire (little-endian): magic (4) | version (1) |
device_id (u16) | trigger_id (u32) | capture_time_ns (i64) |
pose (12 x f64, row-major [R | t]) | intrinsics (6 x f64: fx fy cx cy w h) |
payload_kind (u8) | payload_len (u32) | payload | crc32 (u32, payload only).
"""

from __future__ import annotations

import struct
import zlib
from dataclasses import dataclass, field, replace

import numpy as np

from ..errors import BadMagic, ChecksumMismatch, PayloadTooLarge, TruncatedInput
from ..geometry import Intrinsics, Pose
from .payloads import PayloadKind

MAGIC = b"CREC"
VERSION = 1
MAX_PAYLOAD = 16 * 1024 * 1024

_HEAD = struct.Struct("<4sBHIq")
_POSE = struct.Struct("<12d")
_INTR = struct.Struct("<6d")
_TAIL = struct.Struct("<BI")
_CRC = struct.Struct("<I")
HEADER_SIZE = _HEAD.size + _POSE.size + _INTR.size + _TAIL.size  # 168


def payload_crc(payload: bytes) -> int:
    return zlib.crc32(payload) & 0xFFFFFFFF


@dataclass(frozen=True)
class CaptureRecord:
    """Everything one device produced for one trigger."""

    device_id: int
    trigger_id: int
    capture_time_ns: int
    pose: Pose                     # globalized pose at capture time
    intrinsics: Intrinsics
    payload_kind: PayloadKind
    payload: bytes
    payload_checksum: int = -1     # filled from the payload when negative

    def __post_init__(self):
        if self.payload_checksum < 0:
            object.__setattr__(self, "payload_checksum", payload_crc(self.payload))

    def checksum_ok(self) -> bool:
        return payload_crc(self.payload) == self.payload_checksum


def serialize_record(record: CaptureRecord) -> bytes:
    """Deterministic bytes for a record; inverse of :func:`deserialize_record`."""
    if len(record.payload) > MAX_PAYLOAD:
        raise PayloadTooLarge(f"payload of {len(record.payload)} bytes exceeds "
                              f"{MAX_PAYLOAD}")
    parts = [
        _HEAD.pack(MAGIC, VERSION, record.device_id, record.trigger_id,
                   record.capture_time_ns),
        _POSE.pack(*record.pose.as_matrix().ravel()),
        _INTR.pack(*record.intrinsics.as_vector()),
        _TAIL.pack(int(record.payload_kind), len(record.payload)),
        record.payload,
        _CRC.pack(record.payload_checksum),
    ]
    return b"".join(parts)


def deserialize_record(data: bytes) -> CaptureRecord:
    """Exact inverse of serialize_record on valid input.

    Raises BadMagic / TruncatedInput / ChecksumMismatch on corrupted bytes.
    The pose is NOT validated here; wire input is untrusted and integrity
    verification is a separate stage.
    """
    if len(data) < HEADER_SIZE + _CRC.size:
        raise TruncatedInput(f"record needs >= {HEADER_SIZE + _CRC.size} bytes, "
                             f"got {len(data)}")
    magic, version, device_id, trigger_id, t_ns = _HEAD.unpack_from(data, 0)
    if magic != MAGIC:
        raise BadMagic(f"bad record magic {magic!r}")
    off = _HEAD.size
    pose_vals = _POSE.unpack_from(data, off)
    off += _POSE.size
    intr_vals = _INTR.unpack_from(data, off)
    off += _INTR.size
    kind, n = _TAIL.unpack_from(data, off)
    off += _TAIL.size
    if len(data) < off + n + _CRC.size:
        raise TruncatedInput("record payload truncated")
    payload = data[off:off + n]
    (crc,) = _CRC.unpack_from(data, off + n)
    if payload_crc(payload) != crc:
        raise ChecksumMismatch(f"payload CRC {payload_crc(payload):#010x} != "
                               f"stored {crc:#010x}")
    return CaptureRecord(
        device_id=device_id,
        trigger_id=trigger_id,
        capture_time_ns=t_ns,
        pose=Pose.from_matrix(np.array(pose_vals).reshape(3, 4)),
        intrinsics=Intrinsics.from_vector(intr_vals),
        payload_kind=PayloadKind(kind),
        payload=payload,
        payload_checksum=crc,
    )


def record_size(payload_len: int) -> int:
    return HEADER_SIZE + payload_len + _CRC.size
