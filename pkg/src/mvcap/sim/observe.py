"""Synthetic detector output: noisy 2D joints and capsule silhouettes.

Joint observation projects ground truth through the camera, adds i.i.d.
Gaussian pixel noise, and with the miss-detection probability drops the
whole actor (a detector either finds the person or does not). Joints
projecting outside the frame (plus margin) are missing.

Silhouette rendering tests each pixel's ray against every bone capsule.
In the default "conservative" mode the capsule radius is dilated by the
worst-case sub-pixel offset a floor-rounded projection can introduce, so
any 3D point inside the actor is guaranteed to land on a set mask pixel —
the property voxel carving relies on.
"""

from __future__ import annotations

import numpy as np

from ..geometry import CameraView, Skeleton2D, Skeleton3D
from .actor import ActorModel

OUT_OF_FRAME_MARGIN_PX = 0.0


def observe_joints(truth: Skeleton3D, cam: CameraView, pixel_sigma: float,
                   miss_rate: float, rng,
                   margin_px: float = OUT_OF_FRAME_MARGIN_PX) -> Skeleton2D:
    """One camera's detector output for one frame."""
    m = truth.joint_count
    # the miss draw happens first so the RNG stream is stable per frame
    if miss_rate > 0 and rng.random() < miss_rate:
        return Skeleton2D.all_missing(m, truth.frame_index, cam.camera_id)
    pose = cam.pose
    intr = cam.intrinsics
    pc = (truth.joints - pose.translation) @ pose.rotation
    z = pc[:, 2]
    joints = np.full((m, 2), np.nan)
    conf = np.zeros(m)
    front = z > 1e-6
    u = np.full(m, np.nan)
    v = np.full(m, np.nan)
    u[front] = intr.fx * pc[front, 0] / z[front] + intr.cx
    v[front] = intr.fy * pc[front, 1] / z[front] + intr.cy
    if pixel_sigma > 0:
        noise = rng.normal(0.0, pixel_sigma, size=(m, 2))
        u = u + noise[:, 0]
        v = v + noise[:, 1]
    inside = (front
              & (u >= -margin_px) & (u <= intr.image_w - 1 + margin_px)
              & (v >= -margin_px) & (v <= intr.image_h - 1 + margin_px))
    joints[inside, 0] = u[inside]
    joints[inside, 1] = v[inside]
    conf[inside] = 1.0
    return Skeleton2D(joints, conf, truth.frame_index, cam.camera_id)


def _pixel_rays(cam: CameraView):
    """Unit ray directions through integer pixel coordinates, world frame."""
    intr = cam.intrinsics
    us, vs = np.meshgrid(np.arange(intr.image_w), np.arange(intr.image_h))
    d = np.stack([
        (us.ravel() - intr.cx) / intr.fx,
        (vs.ravel() - intr.cy) / intr.fy,
        np.ones(us.size),
    ], axis=1)
    d = d / np.linalg.norm(d, axis=1, keepdims=True)
    return d @ cam.pose.rotation.T  # camera-frame directions into world


def _ray_segment_distance(origin, dirs, a, b):
    """Exact min distance from rays (origin, dirs, s >= 0) to segment [a, b].

    Returns (distance, depth proxy) where the depth proxy is the larger
    endpoint depth used for conservative dilation.
    """
    v = b - a
    c = float(v @ v)
    w0 = origin - a
    d_coef = dirs @ w0
    if c < 1e-18:
        # zero-length segment: point-to-ray distance
        s = np.maximum(-d_coef, 0.0)
        diff = w0[None, :] + s[:, None] * dirs
        return np.linalg.norm(diff, axis=1)
    bq = dirs @ v
    e = float(v @ w0)
    D = c - bq ** 2

    best = np.full(len(dirs), np.inf)

    # interior optimum where the system is non-degenerate and feasible
    nz = np.abs(D) > 1e-14
    with np.errstate(divide="ignore", invalid="ignore"):
        s_int = (bq * e - c * d_coef) / D
        t_int = (e - bq * d_coef) / D
    feas = nz & (s_int >= 0.0) & (t_int >= 0.0) & (t_int <= 1.0)
    if np.any(feas):
        diff = (w0[None, :] + s_int[feas, None] * dirs[feas]
                - t_int[feas, None] * v[None, :])
        best[feas] = np.linalg.norm(diff, axis=1)

    # boundary candidates: t = 0 (endpoint a), t = 1 (endpoint b), s = 0
    for t_fix in (0.0, 1.0):
        s = np.maximum(-(d_coef - t_fix * bq), 0.0)
        diff = w0[None, :] + s[:, None] * dirs - t_fix * v[None, :]
        best = np.minimum(best, np.linalg.norm(diff, axis=1))
    t0 = np.clip(e / c, 0.0, 1.0)
    best = np.minimum(best, np.linalg.norm(w0 - t0 * v))
    return best


def render_silhouette(capsules, cam: CameraView,
                      coverage: str = "conservative") -> np.ndarray:
    """Binary mask: pixel set iff its ray intersects any capsule.

    ``capsules`` is a list of (segment start, segment end, radius) in world
    coordinates. Conservative coverage dilates each radius by
    sqrt(2) * depth / f_min so floor-rounded projections of interior points
    never miss the mask.
    """
    intr = cam.intrinsics
    dirs = _pixel_rays(cam)
    origin = cam.pose.translation
    fwd = cam.pose.view_axis()
    f_min = min(intr.fx, intr.fy)
    mask = np.zeros(intr.image_w * intr.image_h, dtype=bool)
    for a, b, r in capsules:
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        depth_a = float((a - origin) @ fwd)
        depth_b = float((b - origin) @ fwd)
        if max(depth_a, depth_b) <= 0:
            continue  # capsule fully behind the camera
        radius = r
        if coverage == "conservative":
            radius = r + np.sqrt(2.0) * (max(depth_a, depth_b) + r) / f_min + 1e-12
        dist = _ray_segment_distance(origin, dirs, a, b)
        mask |= dist <= radius
    return mask.reshape(intr.image_h, intr.image_w)


def render_actor_silhouette(actor: ActorModel, t: float, cam: CameraView,
                            coverage: str = "conservative") -> np.ndarray:
    return render_silhouette(actor.capsules_at(t), cam, coverage)


def sphere_silhouette(center, radius: float, cam: CameraView,
                      coverage: str = "conservative") -> np.ndarray:
    """Analytic silhouette of a sphere (a zero-length capsule)."""
    center = np.asarray(center, dtype=float)
    return render_silhouette([(center, center, radius)], cam, coverage)
