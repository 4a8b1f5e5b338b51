import numpy as np
import pytest

from mvcap.errors import DegenerateProjection, InsufficientCameras
from mvcap.geometry import (
    CameraView,
    Intrinsics,
    GlobalTransform,
    Pose,
    pair_angle,
    project,
    valid_pairs,
)

from helpers import look_at_pose, random_rotation, ring_cameras, rotation_about


def make_cam(fx=1.0, fy=1.0, cx=0.5, cy=0.5, w=1, h=1, pose=None):
    # cx/cy must be interior; tests that want cx=cy=0 use a tiny image offset
    return CameraView(Intrinsics(fx, fy, cx, cy, w, h), pose or Pose.identity())


def test_project_optical_axis_hits_principal_point():
    cam = CameraView(Intrinsics(1.0, 1.0, 0.5, 0.5, 1, 1), Pose.identity())
    uv = project((0.0, 0.0, 5.0), cam)
    assert np.allclose(uv, [0.5, 0.5])


def test_project_matches_hand_computation():
    cam = CameraView(Intrinsics(100.0, 100.0, 320.0, 240.0, 640, 480), Pose.identity())
    uv = project((1.0, 0.0, 2.0), cam)
    # x' = fx * X/Z + cx = 100 * 0.5 + 320
    assert np.allclose(uv, [370.0, 240.0])


def test_project_behind_camera_raises():
    cam = make_cam()
    with pytest.raises(DegenerateProjection):
        project((0.0, 0.0, -1.0), cam)
    with pytest.raises(DegenerateProjection):
        project((0.0, 0.0, 0.0), cam)


def test_pose_validation_and_orthonormalization():
    with pytest.raises(ValueError):
        Pose.checked(np.eye(3) * 1.001, np.zeros(3))
    noisy = np.eye(3) + 1e-4 * np.ones((3, 3))
    fixed = Pose(noisy, np.zeros(3)).orthonormalized()
    assert fixed.is_rigid(1e-9)


def test_global_transform_composition():
    T = GlobalTransform(rotation_about([0, 0, 1], 90.0), np.array([1.0, 2.0, 3.0]))
    local = Pose(np.eye(3), np.array([1.0, 0.0, 0.0]))
    g = T.apply(local)
    assert np.allclose(g.translation, [1.0, 3.0, 3.0])
    assert g.is_rigid(1e-9)


def test_pair_angle_identical_poses_is_zero():
    p = look_at_pose([4.0, 0.0, 1.0], [0.0, 0.0, 1.0])
    assert pair_angle(p, p) == pytest.approx(0.0, abs=1e-9)


def test_pair_angle_quarter_and_half_turn():
    base = Pose.identity()
    quarter = Pose(rotation_about([0, 1, 0], 90.0), np.zeros(3))
    half = Pose(rotation_about([0, 1, 0], 180.0), np.zeros(3))
    assert pair_angle(base, quarter) == pytest.approx(90.0, abs=1e-9)
    assert pair_angle(base, half) == pytest.approx(180.0, abs=1e-9)


def test_pair_angle_symmetric_and_in_range():
    rng = np.random.default_rng(7)
    for _ in range(200):
        a = Pose(random_rotation(rng), rng.normal(size=3))
        b = Pose(random_rotation(rng), rng.normal(size=3))
        ab = pair_angle(a, b)
        ba = pair_angle(b, a)
        assert ab == pytest.approx(ba, abs=1e-9)
        assert 0.0 <= ab <= 180.0


def test_valid_pairs_ring_of_three():
    # cameras at 0/60/120 degrees on a circle, aimed at the center: their
    # normals are 60/60/120 degrees apart (hand evaluation of the dot products)
    intr = Intrinsics(500.0, 500.0, 320.0, 240.0, 640, 480)
    cams = {}
    for c, a in enumerate(np.radians([0.0, 60.0, 120.0])):
        pos = [4.0 * np.cos(a), 4.0 * np.sin(a), 1.0]
        cams[c] = CameraView(intr, look_at_pose(pos, [0.0, 0.0, 1.0]), camera_id=c)
    got = valid_pairs(list(cams.values()), 30.0, 150.0)
    assert got == {frozenset((0, 1)), frozenset((1, 2)), frozenset((0, 2))}
    angles = sorted(
        pair_angle(cams[i].pose, cams[j].pose) for i, j in [(0, 1), (1, 2), (0, 2)]
    )
    assert np.allclose(angles, [60.0, 60.0, 120.0], atol=1e-9)


def test_valid_pairs_identical_cameras_below_threshold():
    cam = ring_cameras(count=1)[0]
    assert valid_pairs([cam, cam], 10.0, 170.0) == set()


def test_valid_pairs_full_range_gives_all_pairs():
    cams = list(ring_cameras(count=5).values())
    got = valid_pairs(cams, 0.0, 180.0)
    assert len(got) == 5 * 4 // 2


def test_valid_pairs_requires_two_cameras():
    cams = list(ring_cameras(count=1).values())
    with pytest.raises(InsufficientCameras):
        valid_pairs(cams, 0.0, 180.0)


def test_intrinsics_matrix_is_upper_triangular():
    k = Intrinsics(500.0, 510.0, 320.0, 240.0, 640, 480).matrix()
    assert k[2, 2] == 1.0
    assert np.allclose(k, np.triu(k))
    with pytest.raises(ValueError):
        Intrinsics(-1.0, 1.0, 0.5, 0.5, 1, 1)
    with pytest.raises(ValueError):
        Intrinsics(1.0, 1.0, 2.0, 0.5, 1, 1)
