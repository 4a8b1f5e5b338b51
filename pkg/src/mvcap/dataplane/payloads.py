"""Payload encodings carried inside capture records.

JOINTS2D: M x (f32 x, f32 y, f32 confidence), missing joints encoded as
confidence 0 with NaN coordinates. SILHOUETTE: u32 width, u32 height, u32
run count, then row-major run lengths (u32) alternating values starting
with zeros. IMAGE payloads are opaque bytes.
"""

from __future__ import annotations

import enum
import struct

import numpy as np

from ..errors import TruncatedInput
from ..geometry import Skeleton2D


class PayloadKind(enum.IntEnum):
    IMAGE = 1
    JOINTS2D = 2
    SILHOUETTE = 3


def encode_joints2d(skeleton: Skeleton2D) -> bytes:
    m = skeleton.joint_count
    flat = np.empty((m, 3), dtype="<f4")
    flat[:, :2] = skeleton.joints
    flat[:, 2] = skeleton.confidence
    return flat.tobytes()


def decode_joints2d(data: bytes, frame_index: int = 0,
                    camera_id: int = 0) -> Skeleton2D:
    if len(data) % 12 != 0:
        raise TruncatedInput(f"joints payload of {len(data)} bytes is not a "
                             "multiple of 12")
    flat = np.frombuffer(data, dtype="<f4").reshape(-1, 3).astype(np.float64)
    return Skeleton2D(flat[:, :2], flat[:, 2], frame_index, camera_id)


def encode_silhouette(mask: np.ndarray) -> bytes:
    mask = np.asarray(mask, dtype=bool)
    if mask.ndim != 2:
        raise ValueError("mask must be 2D (height x width)")
    h, w = mask.shape
    flat = mask.ravel()
    # run-length: boundaries where the value flips
    if flat.size == 0:
        runs = np.zeros(0, dtype=np.uint32)
    else:
        change = np.flatnonzero(np.diff(flat.view(np.int8))) + 1
        bounds = np.concatenate([[0], change, [flat.size]])
        runs = np.diff(bounds).astype(np.uint32)
        if flat[0]:
            # runs always start with a zero-run, possibly of length 0
            runs = np.concatenate([[np.uint32(0)], runs])
    head = struct.pack("<III", w, h, len(runs))
    return head + runs.astype("<u4").tobytes()


def decode_silhouette(data: bytes) -> np.ndarray:
    if len(data) < 12:
        raise TruncatedInput("silhouette payload shorter than its header")
    w, h, n_runs = struct.unpack_from("<III", data)
    runs = np.frombuffer(data, dtype="<u4", count=n_runs, offset=12).astype(np.int64)
    if len(data) != 12 + 4 * n_runs:
        raise TruncatedInput("silhouette payload length mismatch")
    total = int(runs.sum())
    if total != w * h:
        raise ValueError(f"run lengths cover {total} pixels, expected {w * h}")
    flat = np.zeros(w * h, dtype=bool)
    pos = 0
    value = False
    for r in runs:
        if value:
            flat[pos:pos + r] = True
        pos += int(r)
        value = not value
    return flat.reshape(h, w)
