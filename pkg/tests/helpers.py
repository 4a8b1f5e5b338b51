"""Shared geometry builders for the test suite."""

import numpy as np

from mvcap.geometry import CameraView, Intrinsics, Pose


def look_at_pose(position, target, up=(0.0, 0.0, 1.0)) -> Pose:
    """Camera pose at ``position`` with +Z viewing axis toward ``target``."""
    position = np.asarray(position, dtype=float)
    target = np.asarray(target, dtype=float)
    fwd = target - position
    fwd = fwd / np.linalg.norm(fwd)
    up = np.asarray(up, dtype=float)
    right = np.cross(fwd, up)
    if np.linalg.norm(right) < 1e-9:
        right = np.cross(fwd, np.array([0.0, 1.0, 0.0]))
    right = right / np.linalg.norm(right)
    down = np.cross(fwd, right)
    # columns are the camera axes (x right, y down, z forward) in world frame
    R = np.stack([right, down, fwd], axis=1)
    return Pose(R, position)


def ring_cameras(count=6, radius=4.0, height=1.0, target=(0.0, 0.0, 1.0),
                 fx=500.0, fy=500.0, width=640, height_px=480):
    """Cameras spaced evenly on a circle, all aimed at ``target``."""
    intr = Intrinsics(fx, fy, width / 2.0, height_px / 2.0, width, height_px)
    cams = {}
    for c in range(count):
        a = 2.0 * np.pi * c / count
        pos = np.array([radius * np.cos(a), radius * np.sin(a), height])
        cams[c] = CameraView(intr, look_at_pose(pos, target), camera_id=c)
    return cams


def rotation_about(axis, degrees):
    axis = np.asarray(axis, dtype=float)
    axis = axis / np.linalg.norm(axis)
    t = np.radians(degrees)
    K = np.array([
        [0.0, -axis[2], axis[1]],
        [axis[2], 0.0, -axis[0]],
        [-axis[1], axis[0], 0.0],
    ])
    return np.eye(3) + np.sin(t) * K + (1.0 - np.cos(t)) * (K @ K)


def random_rotation(rng):
    q = rng.normal(size=4)
    q /= np.linalg.norm(q)
    w, x, y, z = q
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
        [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
        [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
    ])
