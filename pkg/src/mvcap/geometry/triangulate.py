"""Pairwise DLT triangulation and the center-of-mass seed for refinement.

The two-view triangulation is the classic homogeneous DLT: each view
contributes two rows ``u * p3 - p1`` and ``v * p3 - p2`` of the design
matrix, whose least-squares null vector is the point. Pixel coordinates are
Hartley-normalized first for conditioning.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import TriangulationDegenerate
from .camera import CameraView
from .skeleton import Skeleton2D

# Singular values below this fraction of the largest count as rank-deficient.
RANK_TOL = 1e-10


def _normalizing_transform(intr) -> np.ndarray:
    """Similarity that maps pixels into roughly [-1, 1] x [-1, 1]."""
    s = 2.0 / (intr.image_w + intr.image_h)
    return np.array([
        [s, 0.0, -s * intr.cx],
        [0.0, s, -s * intr.cy],
        [0.0, 0.0, 1.0],
    ])


def triangulate_pair(px_a, px_b, cam_a: CameraView, cam_b: CameraView) -> np.ndarray:
    """DLT least-squares 3D point from one pixel correspondence.

    Raises TriangulationDegenerate when the design matrix loses rank
    (coincident cameras / near-parallel rays) or the solution lands at
    infinity.
    """
    pa = np.asarray(px_a, dtype=float)
    pb = np.asarray(px_b, dtype=float)
    rows = []
    for px, cam in ((pa, cam_a), (pb, cam_b)):
        T = _normalizing_transform(cam.intrinsics)
        P = T @ cam.projection_matrix()
        u, v, _ = T @ np.array([px[0], px[1], 1.0])
        rows.append(u * P[2] - P[0])
        rows.append(v * P[2] - P[1])
    A = np.stack(rows)
    _, s, vt = np.linalg.svd(A)
    if s[2] <= RANK_TOL * s[0]:
        raise TriangulationDegenerate(
            f"design matrix rank < 3 (s = {s.tolist()})")
    X = vt[-1]
    if abs(X[3]) <= 1e-12 * np.linalg.norm(X):
        raise TriangulationDegenerate("triangulated point at infinity")
    point = X[:3] / X[3]
    if not np.all(np.isfinite(point)):
        raise TriangulationDegenerate("non-finite triangulation")
    return point


@dataclass
class JointCloud:
    """Per-joint sets of pairwise-triangulated candidate points.

    ``points[m]`` is a list of (point, (cam_i, cam_j)) tuples, one per valid
    camera pair that saw joint ``m``.
    """

    joint_count: int
    points: list = field(default_factory=list)

    def __post_init__(self):
        if not self.points:
            self.points = [[] for _ in range(self.joint_count)]

    def add(self, joint: int, point: np.ndarray, pair: frozenset) -> None:
        self.points[joint].append((np.asarray(point, dtype=float), pair))

    def candidate_array(self, joint: int) -> np.ndarray:
        if not self.points[joint]:
            return np.zeros((0, 3))
        return np.stack([p for p, _ in self.points[joint]])


def triangulate_joints(observations: dict[int, Skeleton2D],
                       cams: dict[int, CameraView],
                       pairs: set[frozenset]) -> JointCloud:
    """Triangulate every joint from every valid pair where both views see it.

    Degenerate pairs are skipped silently; they simply contribute no
    candidate, mirroring how a miss-detection removes a camera from the pool.
    """
    if not observations:
        return JointCloud(0)
    m = next(iter(observations.values())).joint_count
    cloud = JointCloud(m)
    for pair in sorted(pairs, key=sorted):
        i, j = sorted(pair)
        if i not in observations or j not in observations:
            continue
        sa, sb = observations[i], observations[j]
        both = sa.present & sb.present
        for joint in np.flatnonzero(both):
            try:
                point = triangulate_pair(sa.joints[joint], sb.joints[joint],
                                         cams[i], cams[j])
            except TriangulationDegenerate:
                continue
            cloud.add(int(joint), point, pair)
    return cloud


def centroid_init(cloud: JointCloud) -> tuple[np.ndarray, np.ndarray]:
    """Center of mass of each joint's candidate set.

    Returns (init (M, 3), excluded (M,) bool). Joints with an empty candidate
    set get the zero sentinel and are flagged excluded from refinement.
    """
    m = cloud.joint_count
    init = np.zeros((m, 3))
    excluded = np.zeros(m, dtype=bool)
    for joint in range(m):
        cands = cloud.candidate_array(joint)
        if len(cands) == 0:
            excluded[joint] = True
        else:
            init[joint] = cands.mean(axis=0)
    return init, excluded
