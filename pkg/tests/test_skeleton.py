import numpy as np
import pytest

from mvcap.errors import NoDetections
from mvcap.geometry import Detection, Skeleton2D, select_subject, subject_score


def boxed(bbox):
    # minimal two-joint skeleton sitting at the box corners
    (x0, y0, x1, y1) = bbox
    joints = np.array([[x0, y0], [x1, y1]])
    return Detection(Skeleton2D(joints, np.ones(2)), bbox)


def test_single_candidate_is_selected():
    d = boxed((10, 10, 50, 90))
    assert select_subject([d], (640, 480)) is d


def test_centered_box_beats_corner_box_of_equal_area():
    centered = boxed((300, 220, 340, 260))
    corner = boxed((0, 0, 40, 40))
    assert select_subject([corner, centered], (640, 480)) is centered


def test_distance_floor_at_exact_center():
    # a candidate dead-center would divide by zero without the 1 px floor;
    # verify the floored score directly and that selection matches it
    w, h = 640, 480
    center = boxed((300, 220, 340, 260))          # 40x40 at exact center
    big_corner = boxed((0, 0, 100, 100))          # 100x100 at the corner
    s_center = subject_score(center.bbox, (w, h))
    s_corner = subject_score(big_corner.bbox, (w, h))
    assert np.isfinite(s_center)
    assert s_center == pytest.approx(1600.0)      # 1600 px^2 / max(0, 1) px
    dist = np.hypot(50 - 320, 50 - 240)
    assert s_corner == pytest.approx(100 * 100 / dist)
    assert s_center > s_corner
    assert select_subject([big_corner, center], (w, h)) is center


def test_tie_breaks_to_lowest_index():
    a = boxed((300, 220, 340, 260))
    b = boxed((300, 220, 340, 260))
    assert select_subject([a, b], (640, 480)) is a


def test_empty_candidates_raise():
    with pytest.raises(NoDetections):
        select_subject([], (640, 480))


def test_score_is_scale_invariant_in_rank():
    # scaling frame and boxes together multiplies every score by the same
    # positive factor, so the argmax index is unchanged
    rng = np.random.default_rng(3)
    for _ in range(50):
        boxes = []
        for _ in range(4):
            x0, y0 = rng.uniform(0, 500, size=2)
            w, h = rng.uniform(5, 120, size=2)
            boxes.append((x0, y0, x0 + w, y0 + h))
        base = [subject_score(b, (640, 480), distance_floor=0.0) for b in boxes]
        scaled = [
            subject_score(tuple(3.0 * v for v in b), (1920, 1440), distance_floor=0.0)
            for b in boxes
        ]
        assert np.argmax(base) == np.argmax(scaled)


def test_confidence_floor_marks_joints_missing():
    joints = np.array([[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]])
    conf = np.array([0.9, 0.05, 0.2])
    s = Skeleton2D(joints, conf).with_confidence_floor(0.1)
    assert list(s.present) == [True, False, True]
    assert s.confidence[1] == 0.0


def test_skeleton_shapes_validated():
    with pytest.raises(ValueError):
        Skeleton2D(np.zeros((3, 3)), np.zeros(3))
    with pytest.raises(ValueError):
        Skeleton2D(np.zeros((3, 2)), np.zeros(2))
