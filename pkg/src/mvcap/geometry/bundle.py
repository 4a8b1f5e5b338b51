"""Global joint refinement by damped nonlinear least squares.

One refinement per frame minimizes the summed squared pixel distance between
each predicted joint projection and its 2D observation, seeded with the
per-joint center of mass of the pairwise triangulations. Cameras can be held
fixed (the default) or refined jointly with the points.

The optimizer is Levenberg-Marquardt with multiplicative damping: lambda
starts at 1e-3, divides by 10 on an accepted step and multiplies by 10 on a
rejected one. Camera rotations are parameterized as axis-angle increments
composed onto the current rotation, re-based after every accepted step so
the Jacobian is always evaluated at the increment origin.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace

import numpy as np

from ..errors import NoObservations, NonFiniteResidual
from .camera import CameraView, Pose, EPS_DEPTH
from .skeleton import Skeleton2D, Skeleton3D
from .triangulate import centroid_init, triangulate_joints

LAMBDA0 = 1e-3
LAMBDA_MAX = 1e15
MAX_ITERATIONS = 100
COST_REL_TOL = 1e-10
GRAD_INF_TOL = 1e-12


class BaMode(enum.Enum):
    POINTS_ONLY = "points_only"
    POINTS_AND_CAMERAS = "points_and_cameras"


@dataclass(frozen=True)
class BaCameraParams:
    """Camera parameter block: intrinsics + globalized pose + update flag."""

    view: CameraView
    fixed: bool = True


@dataclass
class BaResult:
    skeleton: Skeleton3D
    cameras: dict
    accepted_costs: list  # cost at init, then after each accepted step
    iterations: int
    converged: bool
    final_rms_px: float
    invocations: int = 1

    @property
    def initial_cost(self) -> float:
        return self.accepted_costs[0]

    @property
    def final_cost(self) -> float:
        return self.accepted_costs[-1]


def _axis_angle_matrix(w: np.ndarray) -> np.ndarray:
    theta = np.linalg.norm(w)
    if theta < 1e-12:
        K = _skew(w)
        return np.eye(3) + K  # first order is exact enough below the cutoff
    k = w / theta
    K = _skew(k)
    return np.eye(3) + np.sin(theta) * K + (1.0 - np.cos(theta)) * (K @ K)


def _skew(v) -> np.ndarray:
    return np.array([
        [0.0, -v[2], v[1]],
        [v[2], 0.0, -v[0]],
        [-v[1], v[0], 0.0],
    ])


class _Problem:
    """Residual/Jacobian assembly for one frame's refinement."""

    def __init__(self, points, active_joints, observations, cam_ids, cams, free_cams):
        self.active_joints = active_joints          # array of joint indices
        self.cam_ids = cam_ids                      # stable camera ordering
        self.free_cams = free_cams                  # subset of cam_ids being refined
        self.obs = []                               # (joint_slot, cam_slot, pixel)
        cam_slot = {c: k for k, c in enumerate(cam_ids)}
        joint_slot = {int(m): k for k, m in enumerate(active_joints)}
        for c in cam_ids:
            skel = observations[c]
            for m in active_joints:
                if skel.present[m]:
                    self.obs.append((joint_slot[int(m)], cam_slot[c],
                                     skel.joints[m].copy()))
        self.points = points[active_joints].copy()  # (A, 3)
        self.poses = [cams[c].view.pose for c in cam_ids]
        self.intr = [cams[c].view.intrinsics for c in cam_ids]
        self.free_slot = {cam_slot[c]: k for k, c in enumerate(free_cams)}

    @property
    def n_params(self) -> int:
        return 3 * len(self.points) + 6 * len(self.free_cams)

    def residuals(self, points, poses):
        """Stacked residual vector; returns (r, ok) with ok False when any
        observation sees its point at or behind the camera."""
        r = np.empty(2 * len(self.obs))
        for k, (js, cs, h) in enumerate(self.obs):
            s = points[js]
            pose = poses[cs]
            q = pose.rotation.T @ (s - pose.translation)
            if q[2] <= EPS_DEPTH:
                return None, False
            intr = self.intr[cs]
            r[2 * k] = intr.fx * q[0] / q[2] + intr.cx - h[0]
            r[2 * k + 1] = intr.fy * q[1] / q[2] + intr.cy - h[1]
        if not np.all(np.isfinite(r)):
            return None, False
        return r, True

    def jacobian(self, points, poses):
        """Dense Jacobian at the current state (camera increments at zero)."""
        J = np.zeros((2 * len(self.obs), self.n_params))
        np_pts = 3 * len(self.points)
        for k, (js, cs, _h) in enumerate(self.obs):
            s = points[js]
            pose = poses[cs]
            R = pose.rotation
            q = R.T @ (s - pose.translation)
            intr = self.intr[cs]
            z = q[2]
            dpi = np.array([
                [intr.fx / z, 0.0, -intr.fx * q[0] / z ** 2],
                [0.0, intr.fy / z, -intr.fy * q[1] / z ** 2],
            ])
            J[2 * k:2 * k + 2, 3 * js:3 * js + 3] = dpi @ R.T
            if cs in self.free_slot:
                col = np_pts + 6 * self.free_slot[cs]
                # dq/d(rot increment) = [q]x, dq/d(trans increment) = -R^T
                J[2 * k:2 * k + 2, col:col + 3] = dpi @ _skew(q)
                J[2 * k:2 * k + 2, col + 3:col + 6] = dpi @ (-R.T)
        return J

    def apply_step(self, points, poses, delta):
        np_pts = 3 * len(self.points)
        new_points = points + delta[:np_pts].reshape(-1, 3)
        new_poses = list(poses)
        for cs, k in self.free_slot.items():
            d = delta[np_pts + 6 * k: np_pts + 6 * k + 6]
            pose = poses[cs]
            R = pose.rotation @ _axis_angle_matrix(d[:3])
            new_poses[cs] = Pose(R, pose.translation + d[3:6]).orthonormalized()
        return new_points, new_poses


def bundle_adjust(init: np.ndarray,
                  excluded: np.ndarray,
                  observations: dict[int, Skeleton2D],
                  cams: dict[int, BaCameraParams],
                  mode: BaMode = BaMode.POINTS_ONLY,
                  frame_index: int = 0,
                  max_iterations: int = MAX_ITERATIONS,
                  lambda0: float = LAMBDA0) -> BaResult:
    """Refine joint positions (and optionally camera poses) for one frame.

    ``init``/``excluded`` come from :func:`centroid_init`; excluded joints are
    returned unresolved. In POINTS_ONLY mode the camera blocks are returned
    identically (same objects), never touched by the optimizer.
    """
    init = np.asarray(init, dtype=float)
    excluded = np.asarray(excluded, dtype=bool)
    m_total = init.shape[0]
    cam_ids = sorted(c for c in cams if c in observations)

    counts = np.zeros(m_total, dtype=int)
    for c in cam_ids:
        counts += observations[c].present
    if not np.any((counts >= 2) & ~excluded):
        raise NoObservations("no joint is observed by at least two cameras")

    active = np.flatnonzero(~excluded & (counts >= 1))
    if mode is BaMode.POINTS_AND_CAMERAS:
        free_cams = [c for c in cam_ids if not cams[c].fixed]
    else:
        free_cams = []
    prob = _Problem(init, active, observations, cam_ids, cams, free_cams)

    points = prob.points
    poses = list(prob.poses)
    r, ok = prob.residuals(points, poses)
    if not ok:
        raise NonFiniteResidual("initial state produces invalid residuals")
    cost = float(r @ r)
    accepted = [cost]
    lam = lambda0
    iterations = 0
    converged = False

    while iterations < max_iterations:
        iterations += 1
        J = prob.jacobian(points, poses)
        g = J.T @ r
        if np.max(np.abs(g)) < GRAD_INF_TOL:
            converged = True
            break
        JtJ = J.T @ J
        diag = np.maximum(np.diag(JtJ), 1e-12)
        stepped = False
        while lam <= LAMBDA_MAX:
            try:
                delta = np.linalg.solve(JtJ + lam * np.diag(diag), -g)
            except np.linalg.LinAlgError:
                lam *= 10.0
                continue
            trial_points, trial_poses = prob.apply_step(points, poses, delta)
            trial_r, ok = prob.residuals(trial_points, trial_poses)
            if ok and float(trial_r @ trial_r) < cost:
                new_cost = float(trial_r @ trial_r)
                points, poses, r = trial_points, trial_poses, trial_r
                rel_drop = (cost - new_cost) / max(cost, 1e-300)
                cost = new_cost
                accepted.append(cost)
                lam /= 10.0
                stepped = True
                if rel_drop < COST_REL_TOL:
                    converged = True
                break
            lam *= 10.0
        if not stepped:
            # damping saturated; call it converged only at a tiny gradient
            converged = bool(np.max(np.abs(g)) < 1e-6)
            break
        if converged:
            break

    joints = np.full((m_total, 3), np.nan)
    joints[active] = points
    skeleton = Skeleton3D(joints, frame_index=frame_index)

    if free_cams:
        out_cams = {}
        slot = {c: k for k, c in enumerate(cam_ids)}
        for c, blk in cams.items():
            if c in free_cams:
                new_view = CameraView(blk.view.intrinsics, poses[slot[c]],
                                      blk.view.camera_id)
                out_cams[c] = BaCameraParams(new_view, fixed=False)
            else:
                out_cams[c] = blk
    else:
        out_cams = dict(cams)

    rms = float(np.sqrt(cost / (len(r) / 2))) if len(r) else 0.0
    return BaResult(skeleton, out_cams, accepted, iterations, converged, rms)


def incremental_bundle_adjust(observations: dict[int, Skeleton2D],
                              cams: dict[int, BaCameraParams],
                              pairs: set[frozenset],
                              frame_index: int = 0) -> BaResult:
    """View-by-view baseline: re-run the refiner each time a camera is added.

    Starts from the first camera subset that contains a valid pair, seeds new
    joints from pairwise triangulations within the current subset and reuses
    the previous solution for joints already active. The last run covers all
    cameras, so the final optimum is comparable with the single global run;
    the cost is one optimizer invocation per added view.
    """
    cam_ids = sorted(c for c in cams if c in observations)
    views = {c: cams[c].view for c in cam_ids}
    m_total = next(iter(observations.values())).joint_count

    current = np.full((m_total, 3), np.nan)
    result = None
    invocations = 0
    for upto in range(2, len(cam_ids) + 1):
        subset = cam_ids[:upto]
        sub_pairs = {p for p in pairs if all(i in subset for i in p)}
        if not sub_pairs:
            continue
        sub_obs = {c: observations[c] for c in subset}
        cloud = triangulate_joints(sub_obs, views, sub_pairs)
        init, excluded = centroid_init(cloud)
        known = np.all(np.isfinite(current), axis=1)
        init[known] = current[known]
        excluded = excluded & ~known
        try:
            result = bundle_adjust(init, excluded, sub_obs,
                                   {c: cams[c] for c in subset},
                                   frame_index=frame_index)
        except NoObservations:
            continue
        invocations += 1
        current = result.skeleton.joints.copy()
    if result is None:
        raise NoObservations("no camera subset produced a valid pair")
    result.invocations = invocations
    return result


@dataclass
class ReprojectionReport:
    mean_px: float
    per_joint: np.ndarray          # (M,) mean error per joint, NaN where no data
    per_camera: dict               # camera id -> mean error over its residuals
    pair_count: int


def reprojection_error(skeleton: Skeleton3D,
                       observations: dict[int, Skeleton2D],
                       cams: dict[int, BaCameraParams]) -> ReprojectionReport:
    """Pixel error between predicted projections and 2D observations.

    Averages over every (joint, camera) pair where the joint is resolved and
    the camera observed it; raises EmptyEvaluation when none qualifies.
    """
    from ..errors import EmptyEvaluation

    m_total = skeleton.joint_count
    err_sum = np.zeros(m_total)
    err_cnt = np.zeros(m_total, dtype=int)
    per_camera = {}
    total = 0.0
    n = 0
    for c in sorted(cams):
        if c not in observations:
            continue
        skel2d = observations[c]
        pose = cams[c].view.pose
        intr = cams[c].view.intrinsics
        use = skeleton.resolved & skel2d.present
        if not np.any(use):
            continue
        pts = skeleton.joints[use]
        q = (pts - pose.translation) @ pose.rotation
        z = q[:, 2]
        u = intr.fx * q[:, 0] / z + intr.cx
        v = intr.fy * q[:, 1] / z + intr.cy
        d = np.hypot(u - skel2d.joints[use, 0], v - skel2d.joints[use, 1])
        idx = np.flatnonzero(use)
        err_sum[idx] += d
        err_cnt[idx] += 1
        per_camera[c] = float(np.mean(d))
        total += float(np.sum(d))
        n += len(d)
    if n == 0:
        raise EmptyEvaluation("no resolved joint has an observation")
    per_joint = np.where(err_cnt > 0, err_sum / np.maximum(err_cnt, 1), np.nan)
    return ReprojectionReport(total / n, per_joint, per_camera, n)
