"""Device camera trajectories and SLAM-like pose corruption.

Cameras ride a ring around the actor: static rigs hold their angle, moving
rigs orbit slowly, and handheld shake adds small sinusoidal position wobble
with per-device phases. Estimated poses degrade through a seeded random
walk (rotation about a random axis plus translation drift), matching how
on-device tracking error accumulates rather than resetting per frame.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from ..geometry import Pose


class MotionClass(enum.Enum):
    STATIC = "static"
    MOVING = "moving"


def look_at_pose(position, target, up=(0.0, 0.0, 1.0)) -> Pose:
    """Pose whose +Z viewing axis points from ``position`` to ``target``."""
    position = np.asarray(position, dtype=float)
    fwd = np.asarray(target, dtype=float) - position
    fwd = fwd / np.linalg.norm(fwd)
    up = np.asarray(up, dtype=float)
    right = np.cross(fwd, up)
    if np.linalg.norm(right) < 1e-9:
        right = np.cross(fwd, np.array([0.0, 1.0, 0.0]))
    right = right / np.linalg.norm(right)
    down = np.cross(fwd, right)
    return Pose(np.stack([right, down, fwd], axis=1), position)


@dataclass(frozen=True)
class CameraTrajectory:
    """Ring-mounted camera aimed at the subject, optionally orbiting/shaking."""

    angle0_rad: float
    radius_m: float = 4.0
    height_m: float = 1.2
    target: tuple = (0.0, 0.0, 1.0)
    motion: MotionClass = MotionClass.STATIC
    orbit_speed_rad_s: float = 0.12
    shake_amplitude_m: float = 0.0
    shake_frequency_hz: float = 1.7
    shake_phases: tuple = (0.0, 2.1, 4.2)

    def position_at(self, t: float) -> np.ndarray:
        a = self.angle0_rad
        if self.motion is MotionClass.MOVING:
            a = a + self.orbit_speed_rad_s * t
        pos = np.array([
            self.radius_m * np.cos(a),
            self.radius_m * np.sin(a),
            self.height_m,
        ])
        if self.shake_amplitude_m > 0:
            w = 2.0 * np.pi * self.shake_frequency_hz
            pos = pos + self.shake_amplitude_m * np.array([
                np.sin(w * t + self.shake_phases[0]),
                np.sin(w * t + self.shake_phases[1]),
                np.sin(w * t + self.shake_phases[2]),
            ])
        return pos

    def pose_at(self, t: float) -> Pose:
        return look_at_pose(self.position_at(t), self.target)


def ring_trajectories(count: int, radius_m: float = 4.0, height_m: float = 1.2,
                      target=(0.0, 0.0, 1.0),
                      moving: set[int] | None = None,
                      shake_amplitude_m: float = 0.0,
                      rng=None) -> list[CameraTrajectory]:
    moving = moving or set()
    out = []
    for c in range(count):
        phases = tuple(rng.uniform(0, 2 * np.pi, size=3)) if rng is not None \
            else (0.0, 2.1, 4.2)
        out.append(CameraTrajectory(
            angle0_rad=2.0 * np.pi * c / count,
            radius_m=radius_m,
            height_m=height_m,
            target=tuple(target),
            motion=MotionClass.MOVING if c in moving else MotionClass.STATIC,
            shake_amplitude_m=shake_amplitude_m,
            shake_phases=phases,
        ))
    return out


def _axis_angle(axis, angle_rad):
    axis = np.asarray(axis, dtype=float)
    axis = axis / np.linalg.norm(axis)
    K = np.array([
        [0.0, -axis[2], axis[1]],
        [axis[2], 0.0, -axis[0]],
        [-axis[1], axis[0], 0.0],
    ])
    return np.eye(3) + np.sin(angle_rad) * K + (1 - np.cos(angle_rad)) * (K @ K)


def noisy_pose(pose: Pose, rot_sigma_deg: float, trans_sigma_m: float, rng) -> Pose:
    """One perturbation draw: rotate about a random axis, shift the origin."""
    out = pose
    if rot_sigma_deg > 0:
        axis = rng.normal(size=3)
        angle = np.radians(rng.normal(0.0, rot_sigma_deg))
        out = Pose(_axis_angle(axis, angle) @ out.rotation, out.translation)
    if trans_sigma_m > 0:
        out = Pose(out.rotation,
                   out.translation + rng.normal(0.0, trans_sigma_m, size=3))
    return out.orthonormalized()


class PoseNoiseWalk:
    """Accumulating pose error for one device.

    Each step composes a fresh random rotation/translation increment onto
    the accumulated error, which is then applied to the true pose; the
    output rotation is re-orthonormalized every step.
    """

    def __init__(self, rot_sigma_deg: float, trans_sigma_m: float, rng):
        self.rot_sigma_deg = rot_sigma_deg
        self.trans_sigma_m = trans_sigma_m
        self.rng = rng
        self._rot = np.eye(3)
        self._shift = np.zeros(3)

    def step(self) -> None:
        if self.rot_sigma_deg > 0:
            axis = self.rng.normal(size=3)
            angle = np.radians(self.rng.normal(0.0, self.rot_sigma_deg))
            self._rot = _axis_angle(axis, angle) @ self._rot
        if self.trans_sigma_m > 0:
            self._shift = self._shift + self.rng.normal(0.0, self.trans_sigma_m,
                                                        size=3)

    def apply(self, pose: Pose) -> Pose:
        return Pose(self._rot @ pose.rotation,
                    pose.translation + self._shift).orthonormalized()

    def corrupt(self, pose: Pose) -> Pose:
        """Advance the walk one step and apply it."""
        self.step()
        return self.apply(pose)
