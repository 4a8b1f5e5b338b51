"""Articulated stand-in actor: a 25-joint kinematic tree with capsule flesh.

Joint angles come from a scripted motion (per-joint sinusoids by default) so
every pose is a deterministic function of time; bone lengths are rigid by
construction. Capsule radii per bone give the silhouette geometry something
to rasterize and the visual hull something analytic to check against.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..geometry import Skeleton3D

# index, name, parent, rest offset from parent (meters, z-up world)
_JOINT_TABLE = [
    (0, "pelvis", -1, (0.0, 0.0, 0.0)),
    (1, "spine", 0, (0.0, 0.0, 0.15)),
    (2, "chest", 1, (0.0, 0.0, 0.15)),
    (3, "neck", 2, (0.0, 0.0, 0.12)),
    (4, "head", 3, (0.0, 0.0, 0.12)),
    (5, "head_top", 4, (0.0, 0.0, 0.10)),
    (6, "l_shoulder", 2, (0.0, 0.20, 0.05)),
    (7, "l_elbow", 6, (0.0, 0.28, 0.0)),
    (8, "l_wrist", 7, (0.0, 0.26, 0.0)),
    (9, "l_hand", 8, (0.0, 0.08, 0.0)),
    (10, "r_shoulder", 2, (0.0, -0.20, 0.05)),
    (11, "r_elbow", 10, (0.0, -0.28, 0.0)),
    (12, "r_wrist", 11, (0.0, -0.26, 0.0)),
    (13, "r_hand", 12, (0.0, -0.08, 0.0)),
    (14, "l_hip", 0, (0.0, 0.10, -0.02)),
    (15, "l_knee", 14, (0.0, 0.0, -0.42)),
    (16, "l_ankle", 15, (0.0, 0.0, -0.40)),
    (17, "l_heel", 16, (0.0, 0.0, -0.05)),
    (18, "l_toe", 16, (0.14, 0.0, -0.04)),
    (19, "r_hip", 0, (0.0, -0.10, -0.02)),
    (20, "r_knee", 19, (0.0, 0.0, -0.42)),
    (21, "r_ankle", 20, (0.0, 0.0, -0.40)),
    (22, "r_heel", 21, (0.0, 0.0, -0.05)),
    (23, "r_toe", 21, (0.14, 0.0, -0.04)),
    (24, "nose", 4, (0.08, 0.0, 0.02)),
]

JOINT_COUNT = len(_JOINT_TABLE)
HIP_JOINT = 0

# (parent joint, child joint) -> capsule radius (meters)
_BONE_RADII = {
    (0, 1): 0.11, (1, 2): 0.12, (2, 3): 0.06, (3, 4): 0.06, (4, 5): 0.09,
    (2, 6): 0.05, (6, 7): 0.05, (7, 8): 0.04, (8, 9): 0.035,
    (2, 10): 0.05, (10, 11): 0.05, (11, 12): 0.04, (12, 13): 0.035,
    (0, 14): 0.08, (14, 15): 0.07, (15, 16): 0.05, (16, 17): 0.035,
    (16, 18): 0.035,
    (0, 19): 0.08, (19, 20): 0.07, (20, 21): 0.05, (21, 22): 0.035,
    (21, 23): 0.035,
    (4, 24): 0.05,
}


def _axis_angle(w):
    theta = np.linalg.norm(w)
    if theta < 1e-12:
        return np.eye(3)
    k = w / theta
    K = np.array([
        [0.0, -k[2], k[1]],
        [k[2], 0.0, -k[0]],
        [-k[1], k[0], 0.0],
    ])
    return np.eye(3) + np.sin(theta) * K + (1.0 - np.cos(theta)) * (K @ K)


@dataclass(frozen=True)
class SinusoidChannel:
    """One oscillating joint: axis-angle amplitude_rad * sin(2 pi f t + phase)."""

    joint: int
    axis: tuple
    amplitude_rad: float
    frequency_hz: float
    phase: float = 0.0

    def angle(self, t: float) -> np.ndarray:
        a = self.amplitude_rad * np.sin(2.0 * np.pi * self.frequency_hz * t
                                        + self.phase)
        ax = np.asarray(self.axis, dtype=float)
        return a * ax / np.linalg.norm(ax)


@dataclass(frozen=True)
class MotionScript:
    """Joint rotations + root sway as functions of time."""

    channels: tuple = ()
    root_base: tuple = (0.0, 0.0, 1.0)
    root_sway_amplitude_m: float = 0.0
    root_sway_frequency_hz: float = 0.5
    duration_s: float = float("inf")

    def joint_rotations(self, t: float) -> dict[int, np.ndarray]:
        out: dict[int, np.ndarray] = {}
        for ch in self.channels:
            w = ch.angle(t)
            out[ch.joint] = out.get(ch.joint, np.zeros(3)) + w
        return out

    def root_position(self, t: float) -> np.ndarray:
        base = np.asarray(self.root_base, dtype=float)
        sway = self.root_sway_amplitude_m * np.sin(
            2.0 * np.pi * self.root_sway_frequency_hz * t)
        return base + np.array([sway, 0.0, 0.0])


def rest_script() -> MotionScript:
    return MotionScript()


def exercise_script(frequency_hz: float = 0.5) -> MotionScript:
    """Default routine: arm swings, opposite leg swings, slight trunk twist.

    Every channel shares one frequency, so the script is exactly periodic
    with period 1/frequency.
    """
    f = frequency_hz
    ch = [
        SinusoidChannel(6, (1, 0, 0), 0.9, f),             # left arm
        SinusoidChannel(10, (1, 0, 0), 0.9, f, np.pi),     # right arm, opposed
        SinusoidChannel(7, (1, 0, 0), 0.5, f, 0.4),
        SinusoidChannel(11, (1, 0, 0), 0.5, f, np.pi + 0.4),
        SinusoidChannel(14, (0, 1, 0), 0.45, f, np.pi),    # legs counter arms
        SinusoidChannel(19, (0, 1, 0), 0.45, f),
        SinusoidChannel(15, (0, 1, 0), 0.35, f, 0.9),
        SinusoidChannel(20, (0, 1, 0), 0.35, f, np.pi + 0.9),
        SinusoidChannel(1, (0, 0, 1), 0.18, f),            # trunk twist
        SinusoidChannel(3, (0, 0, 1), 0.12, f, 0.7),
    ]
    return MotionScript(tuple(ch), root_sway_amplitude_m=0.08,
                        root_sway_frequency_hz=f)


@dataclass(frozen=True)
class ActorModel:
    script: MotionScript = field(default_factory=exercise_script)
    scale: float = 1.0

    @property
    def joint_count(self) -> int:
        return JOINT_COUNT

    @property
    def hip_joint(self) -> int:
        return HIP_JOINT

    @property
    def parents(self) -> list[int]:
        return [p for _, _, p, _ in _JOINT_TABLE]

    @property
    def offsets(self) -> np.ndarray:
        return self.scale * np.array([o for _, _, _, o in _JOINT_TABLE])

    @property
    def bones(self) -> list[tuple[int, int, float]]:
        """(parent, child, capsule radius) per bone."""
        return [(p, c, self.scale * r) for (p, c), r in _BONE_RADII.items()]

    def bone_lengths(self) -> dict[tuple[int, int], float]:
        off = self.offsets
        return {(p, c): float(np.linalg.norm(off[c])) for p, c, _ in self.bones}

    def pose_at(self, t: float) -> Skeleton3D:
        """Forward kinematics of the script at time ``t``."""
        if t > self.script.duration_s:
            raise ValueError(f"t={t} beyond the script duration")
        rotations = self.script.joint_rotations(t)
        offsets = self.offsets
        parents = self.parents
        pos = np.zeros((JOINT_COUNT, 3))
        rot = [np.eye(3)] * JOINT_COUNT
        for j in range(JOINT_COUNT):
            local = _axis_angle(rotations[j]) if j in rotations else np.eye(3)
            p = parents[j]
            if p < 0:
                pos[j] = self.script.root_position(t)
                rot[j] = local
            else:
                rot[j] = rot[p] @ local
                pos[j] = pos[p] + rot[p] @ offsets[j]
        return Skeleton3D(pos)

    def capsules_at(self, t: float) -> list[tuple[np.ndarray, np.ndarray, float]]:
        """(segment start, segment end, radius) per bone at time ``t``."""
        joints = self.pose_at(t).joints
        return [(joints[p], joints[c], r) for p, c, r in self.bones]


def actor_pose_at(t: float, actor: ActorModel) -> Skeleton3D:
    return actor.pose_at(t)
