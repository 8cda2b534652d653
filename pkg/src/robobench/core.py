"""Shared domain types and validation.

All types are immutable value objects; vectors are float64 numpy arrays.
World frame: z up, origin at the arena center on the table surface.
Quaternions are scalar-last (x, y, z, w).
"""

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import rotation
from .errors import WrongDimension

TORQUE = "torque"
POSITION = "position"

ACTION_KINDS = (TORQUE, POSITION)

N_JOINTS = 9
N_FINGERS = 3


def _vec(values, n, name):
    arr = np.asarray(values, dtype=np.float64)
    if arr.shape != (n,):
        raise WrongDimension(f"{name} must have exactly {n} entries, got shape {arr.shape}")
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class Action:
    """One control command: a 9-D torque (N·m) or position (rad) vector."""

    kind: str
    values: np.ndarray
    valid: bool = True

    def __post_init__(self):
        if self.kind not in ACTION_KINDS:
            raise ValueError(f"unknown action kind {self.kind!r}")
        object.__setattr__(self, "values", _vec(self.values, N_JOINTS, "action values"))

    @staticmethod
    def zero_torque():
        return Action(TORQUE, np.zeros(N_JOINTS))


def validate_action(action, cfg=None):
    """Replace non-finite entries by 0 and flag the action invalid if any were.

    Does not clamp; clamping is the plant's safety layer.  Raises
    WrongDimension if the vector does not have 9 entries (enforced on
    construction, re-checked here for defensiveness).
    """
    values = np.asarray(action.values, dtype=np.float64)
    if values.shape != (N_JOINTS,):
        raise WrongDimension(f"action must have {N_JOINTS} entries, got {values.shape}")
    finite = np.isfinite(values)
    if finite.all():
        return action
    return Action(action.kind, np.where(finite, values, 0.0), valid=False)


@dataclass(frozen=True)
class RobotObservation:
    """Per-step proprioception at the control rate."""

    timestep: int
    position: np.ndarray  # rad
    velocity: np.ndarray  # rad/s
    torque: np.ndarray  # N·m actually applied
    tip_force: np.ndarray  # N, one per finger, >= 0

    def __post_init__(self):
        object.__setattr__(self, "position", _vec(self.position, N_JOINTS, "position"))
        object.__setattr__(self, "velocity", _vec(self.velocity, N_JOINTS, "velocity"))
        object.__setattr__(self, "torque", _vec(self.torque, N_JOINTS, "torque"))
        object.__setattr__(self, "tip_force", _vec(self.tip_force, N_FINGERS, "tip_force"))


@dataclass(frozen=True)
class Pose:
    """Position (m) and unit quaternion orientation in the world frame."""

    position: np.ndarray
    orientation: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "position", _vec(self.position, 3, "position"))
        object.__setattr__(self, "orientation", _vec(self.orientation, 4, "orientation"))

    @staticmethod
    def identity(position=(0.0, 0.0, 0.0)):
        return Pose(np.asarray(position, dtype=np.float64), rotation.IDENTITY)

    def is_normalized(self, tol=1e-9):
        return abs(np.linalg.norm(self.orientation) - 1.0) <= tol


@dataclass(frozen=True)
class CameraImage:
    """Raw image payload; empty by default (no rendering in this package)."""

    width: int = 0
    height: int = 0
    data: bytes = b""


@dataclass(frozen=True)
class CameraObservation:
    """Object pose (+ optional images) emitted every camera period."""

    timestep: int
    object_pose: Pose
    pose_confidence: float = 1.0
    images: tuple = (CameraImage(), CameraImage(), CameraImage())


@dataclass(frozen=True)
class Goal:
    """Target pose; orientation is meaningful only for level 4."""

    level: int
    pose: Pose

    def __post_init__(self):
        if self.level not in (1, 2, 3, 4):
            raise ValueError(f"level must be in 1..4, got {self.level}")


@dataclass(frozen=True)
class EvaluationParams:
    """Arena geometry and episode timing."""

    arena_diameter: float = 0.39  # m
    max_height: float = 0.1  # m
    control_rate: int = 1000  # Hz
    episode_steps: int = 120000

    @property
    def dt(self):
        return 1.0 / self.control_rate

    @property
    def camera_period(self):
        return self.control_rate // 10

    @staticmethod
    def phase_profile(phase):
        if phase == 1:
            return EvaluationParams(control_rate=250, episode_steps=3750)
        return EvaluationParams(control_rate=1000, episode_steps=120000)


@dataclass(frozen=True)
class ObjectConfig:
    """Manipulated object: an axis-aligned box in its body frame."""

    half_extents: np.ndarray
    long_axis: np.ndarray = field(default_factory=lambda: np.array([0.0, 0.0, 1.0]))
    mass: float = 0.094  # kg

    def __post_init__(self):
        object.__setattr__(self, "half_extents", _vec(self.half_extents, 3, "half_extents"))
        axis = np.asarray(self.long_axis, dtype=np.float64)
        axis = axis / np.linalg.norm(axis)
        object.__setattr__(self, "long_axis", _vec(axis, 3, "long_axis"))

    @staticmethod
    def cube():
        """65 mm cube (phases 1 and 2)."""
        return ObjectConfig(half_extents=np.array([0.0325, 0.0325, 0.0325]), mass=0.094)

    @staticmethod
    def cuboid():
        """20x20x80 mm elongated cuboid (phase 3), long axis = local z."""
        return ObjectConfig(half_extents=np.array([0.01, 0.01, 0.04]), mass=0.011)

    @staticmethod
    def for_phase(phase):
        return ObjectConfig.cuboid() if phase == 3 else ObjectConfig.cube()

    @property
    def resting_half_height(self):
        """Height of the box center when resting flat on the table."""
        return float(self.half_extents[2])


def goal_in_arena(goal, params):
    x, y, z = goal.pose.position
    return math.hypot(x, y) <= params.arena_diameter / 2.0 and 0.0 <= z <= params.max_height


__all__ = [
    "Action",
    "CameraImage",
    "CameraObservation",
    "EvaluationParams",
    "Goal",
    "ObjectConfig",
    "Pose",
    "RobotObservation",
    "TORQUE",
    "POSITION",
    "N_JOINTS",
    "N_FINGERS",
    "goal_in_arena",
    "validate_action",
    "replace",
]
