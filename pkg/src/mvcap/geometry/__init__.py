from .camera import (
    CameraView,
    GlobalTransform,
    Intrinsics,
    Pose,
    pair_angle,
    project,
    project_many,
    valid_pairs,
    DEFAULT_MIN_PAIR_ANGLE,
    DEFAULT_MAX_PAIR_ANGLE,
)
from .skeleton import Detection, Skeleton2D, Skeleton3D, select_subject, subject_score
from .triangulate import JointCloud, centroid_init, triangulate_joints, triangulate_pair
from .bundle import (
    BaCameraParams,
    BaMode,
    BaResult,
    ReprojectionReport,
    bundle_adjust,
    incremental_bundle_adjust,
    reprojection_error,
)
