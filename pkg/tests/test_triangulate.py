import numpy as np
import pytest

from mvcap.errors import TriangulationDegenerate
from mvcap.geometry import (
    Skeleton2D,
    centroid_init,
    project,
    triangulate_joints,
    triangulate_pair,
    valid_pairs,
)
from mvcap.geometry.triangulate import JointCloud

from helpers import ring_cameras


def test_project_then_triangulate_recovers_point():
    cams = ring_cameras(count=6)
    point = np.array([0.2, -0.1, 1.3])
    pa = project(point, cams[0])
    pb = project(point, cams[1])  # 60 degrees apart on the ring
    got = triangulate_pair(pa, pb, cams[0], cams[1])
    assert np.linalg.norm(got - point) < 1e-8


def test_identical_cameras_are_degenerate():
    cams = ring_cameras(count=6)
    point = np.array([0.0, 0.0, 1.0])
    px = project(point, cams[0])
    with pytest.raises(TriangulationDegenerate):
        triangulate_pair(px, px, cams[0], cams[0])


def test_projection_triangulation_identity_randomized():
    # 1000 random points in front of random valid pairs round-trip to 1e-8 m
    cams = ring_cameras(count=6)
    pairs = sorted(valid_pairs(list(cams.values()), 15.0, 165.0), key=sorted)
    rng = np.random.default_rng(42)
    for _ in range(1000):
        i, j = sorted(pairs[rng.integers(len(pairs))])
        point = np.array([rng.uniform(-0.8, 0.8), rng.uniform(-0.8, 0.8),
                          rng.uniform(0.3, 1.9)])
        got = triangulate_pair(project(point, cams[i]), project(point, cams[j]),
                               cams[i], cams[j])
        assert np.linalg.norm(got - point) < 1e-8


def test_noisy_triangulation_error_bound():
    # Monte-Carlo oracle: sigma = 1 px on both views, ~2 m depth, 60 degree
    # baseline, fx = 500 -> median error stays under 2 cm
    cams = ring_cameras(count=6, radius=2.0)
    rng = np.random.default_rng(11)
    errors = []
    point = np.array([0.0, 0.0, 1.0])
    for _ in range(1000):
        pa = project(point, cams[0]) + rng.normal(0.0, 1.0, size=2)
        pb = project(point, cams[1]) + rng.normal(0.0, 1.0, size=2)
        got = triangulate_pair(pa, pb, cams[0], cams[1])
        errors.append(np.linalg.norm(got - point))
    assert np.median(errors) < 0.02


def test_triangulate_joints_respects_presence_and_pairs():
    cams = ring_cameras(count=3)
    pairs = valid_pairs(list(cams.values()), 0.0, 180.0)
    truth = np.array([[0.0, 0.0, 1.0], [0.3, 0.1, 1.2]])
    obs = {}
    for c, cam in cams.items():
        joints = np.stack([project(p, cam) for p in truth])
        conf = np.ones(2)
        if c == 2:
            joints[1] = np.nan  # camera 2 misses joint 1
            conf[1] = 0.0
        obs[c] = Skeleton2D(joints, conf, camera_id=c)
    cloud = triangulate_joints(obs, cams, pairs)
    assert len(cloud.points[0]) == 3   # all three pairs saw joint 0
    assert len(cloud.points[1]) == 1   # only pair {0,1} saw joint 1
    for joint, want in enumerate(truth):
        for got, pair in cloud.points[joint]:
            assert pair in pairs
            assert np.linalg.norm(got - want) < 1e-8


def test_centroid_init_mean_sentinel_and_singleton():
    cloud = JointCloud(3)
    cloud.add(0, np.array([1.0, 1.0, 1.0]), frozenset((0, 1)))
    cloud.add(0, np.array([3.0, 3.0, 3.0]), frozenset((0, 2)))
    cloud.add(2, np.array([0.5, 0.25, -1.0]), frozenset((1, 2)))
    init, excluded = centroid_init(cloud)
    assert np.allclose(init[0], [2.0, 2.0, 2.0])
    assert np.allclose(init[1], [0.0, 0.0, 0.0]) and excluded[1]
    assert np.allclose(init[2], [0.5, 0.25, -1.0]) and not excluded[2]
    assert not excluded[0]
