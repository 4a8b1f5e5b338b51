"""Skeleton containers and subject selection on the image plane."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import NoDetections

DEFAULT_JOINT_COUNT = 25

# Joints with detector confidence below this are treated as missing.
DEFAULT_CONFIDENCE_FLOOR = 0.1

# Pixel floor for the center-distance term of the subject score.
CENTER_DISTANCE_FLOOR_PX = 1.0


@dataclass(frozen=True)
class Skeleton2D:
    """Ordered 2D joints of one subject in one frame of one camera.

    ``joints`` is (M, 2) with NaN rows for missing joints; ``confidence`` is
    (M,) in [0, 1], zero where missing.
    """

    joints: np.ndarray
    confidence: np.ndarray
    frame_index: int = 0
    camera_id: int = 0

    def __post_init__(self):
        j = np.array(self.joints, dtype=np.float64)
        c = np.array(self.confidence, dtype=np.float64)
        if j.ndim != 2 or j.shape[1] != 2:
            raise ValueError("joints must be (M, 2)")
        if c.shape != (j.shape[0],):
            raise ValueError("confidence must be (M,)")
        j.setflags(write=False)
        c.setflags(write=False)
        object.__setattr__(self, "joints", j)
        object.__setattr__(self, "confidence", c)

    @property
    def joint_count(self) -> int:
        return self.joints.shape[0]

    @property
    def present(self) -> np.ndarray:
        """Boolean mask of joints that carry a valid detection."""
        return np.all(np.isfinite(self.joints), axis=1)

    @classmethod
    def all_missing(cls, m: int = DEFAULT_JOINT_COUNT, frame_index: int = 0,
                    camera_id: int = 0) -> "Skeleton2D":
        return cls(np.full((m, 2), np.nan), np.zeros(m), frame_index, camera_id)

    def with_confidence_floor(self, floor: float = DEFAULT_CONFIDENCE_FLOOR) -> "Skeleton2D":
        """Demote joints below the confidence floor to missing."""
        keep = self.confidence >= floor
        j = np.where(keep[:, None], self.joints, np.nan)
        c = np.where(keep, self.confidence, 0.0)
        return Skeleton2D(j, c, self.frame_index, self.camera_id)


@dataclass(frozen=True)
class Skeleton3D:
    """Ordered 3D joints in world coordinates; NaN rows are unresolved."""

    joints: np.ndarray
    frame_index: int = 0

    def __post_init__(self):
        j = np.array(self.joints, dtype=np.float64)
        if j.ndim != 2 or j.shape[1] != 3:
            raise ValueError("joints must be (M, 3)")
        j.setflags(write=False)
        object.__setattr__(self, "joints", j)

    @property
    def joint_count(self) -> int:
        return self.joints.shape[0]

    @property
    def resolved(self) -> np.ndarray:
        return np.all(np.isfinite(self.joints), axis=1)


@dataclass(frozen=True)
class Detection:
    """One subject candidate: a 2D skeleton plus its bounding box."""

    skeleton: Skeleton2D
    bbox: tuple[float, float, float, float]  # (x_min, y_min, x_max, y_max)

    @classmethod
    def from_skeleton(cls, skeleton: Skeleton2D) -> "Detection":
        pts = skeleton.joints[skeleton.present]
        if len(pts) == 0:
            raise ValueError("cannot box a fully-missing skeleton")
        x0, y0 = pts.min(axis=0)
        x1, y1 = pts.max(axis=0)
        return cls(skeleton, (float(x0), float(y0), float(x1), float(y1)))


def subject_score(bbox, frame_size,
                  distance_floor: float = CENTER_DISTANCE_FLOOR_PX) -> float:
    """Box area times inverse distance from box center to frame center.

    The distance is floored to avoid a singularity for a perfectly centered
    candidate.
    """
    x0, y0, x1, y1 = bbox
    w, h = frame_size
    area = max(x1 - x0, 0.0) * max(y1 - y0, 0.0)
    cx, cy = (x0 + x1) / 2.0, (y0 + y1) / 2.0
    dist = float(np.hypot(cx - w / 2.0, cy - h / 2.0))
    return area / max(dist, distance_floor)


def select_subject(detections: list[Detection], frame_size) -> Detection:
    """Pick the candidate most likely to be the recorded subject.

    Subjects are filmed close-up and centered, so the max of
    area * 1/center-distance wins; ties break to the lowest index.
    """
    if not detections:
        raise NoDetections("no subject candidates in frame")
    scores = [subject_score(d.bbox, frame_size) for d in detections]
    best = int(np.argmax(scores))  # argmax returns the first maximum
    return detections[best]
