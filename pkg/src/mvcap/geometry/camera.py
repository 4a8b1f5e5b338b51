"""Pinhole camera model, rigid poses and camera-pair selection.

Pose convention: ``rotation`` maps camera-frame vectors into the parent
frame and ``translation`` is the camera origin in the parent frame, i.e. a
point ``x_cam`` in the camera frame sits at ``R @ x_cam + t`` in the world.
The camera looks down its +Z axis, so the image-plane normal in world
coordinates is ``R @ [0, 0, 1]``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from ..errors import DegenerateProjection, InsufficientCameras

# Minimum camera-frame depth for a projectable point (meters).
EPS_DEPTH = 1e-6

# Default admissible range for pair-selection baseline angles (degrees).
DEFAULT_MIN_PAIR_ANGLE = 20.0
DEFAULT_MAX_PAIR_ANGLE = 160.0


def _as_readonly(a, shape, dtype=np.float64):
    out = np.array(a, dtype=dtype)
    if out.shape != shape:
        raise ValueError(f"expected shape {shape}, got {out.shape}")
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class Intrinsics:
    """Pinhole intrinsic parameters in pixels."""

    fx: float
    fy: float
    cx: float
    cy: float
    image_w: int
    image_h: int

    def __post_init__(self):
        if not (self.fx > 0 and self.fy > 0):
            raise ValueError("focal lengths must be positive")
        if not (0 < self.cx < self.image_w and 0 < self.cy < self.image_h):
            raise ValueError("principal point must lie inside the image")

    def matrix(self) -> np.ndarray:
        """3x3 upper-triangular camera matrix with unit bottom-right entry."""
        return np.array([
            [self.fx, 0.0, self.cx],
            [0.0, self.fy, self.cy],
            [0.0, 0.0, 1.0],
        ])

    def as_vector(self) -> np.ndarray:
        """(fx, fy, cx, cy, w, h) in the wire-format field order."""
        return np.array([self.fx, self.fy, self.cx, self.cy,
                         float(self.image_w), float(self.image_h)])

    @classmethod
    def from_vector(cls, v) -> "Intrinsics":
        v = np.asarray(v, dtype=float)
        return cls(fx=float(v[0]), fy=float(v[1]), cx=float(v[2]),
                   cy=float(v[3]), image_w=int(round(v[4])), image_h=int(round(v[5])))


@dataclass(frozen=True)
class Pose:
    """Rigid camera pose (camera-to-parent rotation + camera origin)."""

    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "rotation", _as_readonly(self.rotation, (3, 3)))
        object.__setattr__(self, "translation", _as_readonly(self.translation, (3,)))

    @classmethod
    def identity(cls) -> "Pose":
        return cls(np.eye(3), np.zeros(3))

    @classmethod
    def checked(cls, rotation, translation, tol: float = 1e-9) -> "Pose":
        """Construct and enforce orthonormality with det +1."""
        pose = cls(rotation, translation)
        if not pose.is_rigid(tol):
            raise ValueError("rotation is not orthonormal with det +1")
        return pose

    def is_rigid(self, tol: float = 1e-9) -> bool:
        R = self.rotation
        if not np.all(np.isfinite(R)) or not np.all(np.isfinite(self.translation)):
            return False
        err = np.linalg.norm(R.T @ R - np.eye(3))
        return err <= tol and np.linalg.det(R) > 0

    def orthonormalized(self) -> "Pose":
        """Nearest rotation by SVD; keeps translation."""
        u, _, vt = np.linalg.svd(self.rotation)
        R = u @ vt
        if np.linalg.det(R) < 0:
            u[:, -1] *= -1
            R = u @ vt
        return Pose(R, self.translation)

    def view_axis(self) -> np.ndarray:
        """Unit image-plane normal: camera +Z expressed in the parent frame."""
        return self.rotation @ np.array([0.0, 0.0, 1.0])

    def world_to_camera(self, points: np.ndarray) -> np.ndarray:
        """Map world points (..., 3) into the camera frame."""
        p = np.asarray(points, dtype=float)
        return (p - self.translation) @ self.rotation

    def as_matrix(self) -> np.ndarray:
        """3x4 [R | t] block, row-major."""
        return np.hstack([self.rotation, self.translation[:, None]])

    @classmethod
    def from_matrix(cls, m) -> "Pose":
        m = np.asarray(m, dtype=float).reshape(3, 4)
        return cls(m[:, :3], m[:, 3])

    def projection_matrix(self, intr: Intrinsics) -> np.ndarray:
        """3x4 world-to-pixel projection matrix K [R^T | -R^T t]."""
        Rt = self.rotation.T
        return intr.matrix() @ np.hstack([Rt, (-Rt @ self.translation)[:, None]])


@dataclass(frozen=True)
class GlobalTransform:
    """Per-device rigid transform mapping device-local poses into the shared
    world frame. Held constant for a capture session."""

    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "rotation", _as_readonly(self.rotation, (3, 3)))
        object.__setattr__(self, "translation", _as_readonly(self.translation, (3,)))
        R = self.rotation
        if np.linalg.norm(R.T @ R - np.eye(3)) > 1e-9 or np.linalg.det(R) < 0:
            raise ValueError("global transform must be rigid")

    @classmethod
    def identity(cls) -> "GlobalTransform":
        return cls(np.eye(3), np.zeros(3))

    def apply(self, local: Pose) -> Pose:
        """Globalize a device-local pose: rotation composes, origin maps."""
        return Pose(self.rotation @ local.rotation,
                    self.rotation @ local.translation + self.translation)


@dataclass(frozen=True)
class CameraView:
    """A globalized camera: intrinsics plus world-frame pose."""

    intrinsics: Intrinsics
    pose: Pose
    camera_id: int = 0

    def projection_matrix(self) -> np.ndarray:
        return self.pose.projection_matrix(self.intrinsics)


def project(point, cam: CameraView, eps_depth: float = EPS_DEPTH) -> np.ndarray:
    """Project a world point to inhomogeneous pixel coordinates.

    No clamping to image bounds. Raises DegenerateProjection when the
    camera-frame depth is at or below ``eps_depth`` (point at/behind camera).
    """
    p = np.asarray(point, dtype=float)
    if not np.all(np.isfinite(p)):
        raise DegenerateProjection("non-finite point")
    pc = cam.pose.world_to_camera(p)
    z = pc[..., 2]
    if np.any(z <= eps_depth):
        raise DegenerateProjection(f"camera-frame depth {np.min(z):.3g} <= {eps_depth:.3g}")
    intr = cam.intrinsics
    u = intr.fx * pc[..., 0] / z + intr.cx
    v = intr.fy * pc[..., 1] / z + intr.cy
    return np.stack([u, v], axis=-1)


def project_many(points: np.ndarray, cam: CameraView) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized projection of (N, 3) points.

    Returns (pixels (N, 2), depths (N,)); entries with depth <= EPS_DEPTH get
    NaN pixels instead of raising, so callers can mask them.
    """
    pc = cam.pose.world_to_camera(np.asarray(points, dtype=float))
    z = pc[:, 2]
    ok = z > EPS_DEPTH
    intr = cam.intrinsics
    px = np.full((len(pc), 2), np.nan)
    px[ok, 0] = intr.fx * pc[ok, 0] / z[ok] + intr.cx
    px[ok, 1] = intr.fy * pc[ok, 1] / z[ok] + intr.cy
    return px, z


def pair_angle(pose_a: Pose, pose_b: Pose) -> float:
    """Angle in degrees between two cameras' image-plane normals, in [0, 180]."""
    na = pose_a.view_axis()
    nb = pose_b.view_axis()
    # unit vectors by construction; clip guards fp rounding at the interval ends
    c = np.clip(np.dot(na, nb) / (np.linalg.norm(na) * np.linalg.norm(nb)), -1.0, 1.0)
    return float(np.degrees(np.arccos(c)))


def valid_pairs(cams: list[CameraView],
                min_angle_deg: float = DEFAULT_MIN_PAIR_ANGLE,
                max_angle_deg: float = DEFAULT_MAX_PAIR_ANGLE) -> set[frozenset]:
    """Unordered camera-index pairs whose baseline angle lies in the window.

    The window keeps out near-degenerate (small baseline) and near-antipodal
    pairs that make triangulation unstable.
    """
    if len(cams) < 2:
        raise InsufficientCameras(f"need >= 2 cameras, got {len(cams)}")
    if min_angle_deg > max_angle_deg:
        raise ValueError("min_angle_deg must not exceed max_angle_deg")
    pairs = set()
    for i, j in itertools.combinations(range(len(cams)), 2):
        alpha = pair_angle(cams[i].pose, cams[j].pose)
        if min_angle_deg <= alpha <= max_angle_deg:
            pairs.add(frozenset((i, j)))
    return pairs
