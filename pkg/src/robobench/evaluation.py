"""Goal sampling, per-step rewards, cumulative rewards and scoring.

Errors are normalized to [0, 1]; rewards are negated errors, so cumulative
rewards are always <= 0 and the best possible episode scores 0.
"""

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import rotation
from .core import EvaluationParams, Goal, ObjectConfig, Pose
from .errors import LengthMismatch


@dataclass(frozen=True)
class RewardSpec:
    """Selects the reward variant for a phase/level combination."""

    phase: int
    level: int
    params: EvaluationParams = field(default_factory=EvaluationParams)
    object: ObjectConfig = None

    def __post_init__(self):
        if self.phase not in (1, 2, 3):
            raise ValueError(f"phase must be 1..3, got {self.phase}")
        if self.level not in (1, 2, 3, 4):
            raise ValueError(f"level must be 1..4, got {self.level}")
        if self.object is None:
            object.__setattr__(self, "object", ObjectConfig.for_phase(self.phase))

    @property
    def uses_long_axis(self):
        return self.phase == 3 and self.level == 4


def position_error(goal_pos, actual_pos, params=None):
    """Weighted xy-plane / height error, normalized to roughly [0, 1]."""
    if params is None:
        params = EvaluationParams()
    gx, gy, gz = goal_pos
    ax, ay, az = actual_pos
    xy = math.hypot(gx - ax, gy - ay)
    return 0.5 * (xy / params.arena_diameter + abs(gz - az) / params.max_height)


def rotation_error(goal_quat, actual_quat):
    """Angle of the rotation taking actual to goal orientation, over pi."""
    q = rotation.multiply(goal_quat, rotation.conjugate(actual_quat))
    return 2.0 * math.atan2(math.sqrt(q[0] ** 2 + q[1] ** 2 + q[2] ** 2), abs(q[3])) / math.pi


def long_axis_error(goal_quat, actual_quat, axis):
    """Angle between the object long axes only, ignoring spin about them."""
    a_goal = rotation.rotate_vector(goal_quat, axis)
    a_actual = rotation.rotate_vector(actual_quat, axis)
    dot = float(np.clip(a_goal @ a_actual, -1.0, 1.0))
    return math.acos(dot) / math.pi


def step_reward(spec, goal, object_pose):
    """Per-step reward; <= 0, and 0 exactly when the errors vanish."""
    e_pos = position_error(goal.pose.position, object_pose.position, spec.params)
    if spec.level != 4:
        return -e_pos
    if spec.uses_long_axis:
        e_rot = long_axis_error(goal.pose.orientation, object_pose.orientation, spec.object.long_axis)
    else:
        e_rot = rotation_error(goal.pose.orientation, object_pose.orientation)
    return -(e_pos + e_rot) / 2.0


def cumulative_reward(spec, goal, poses):
    """Sum of step rewards over a pose trajectory of exactly episode_steps."""
    poses = list(poses)
    if len(poses) != spec.params.episode_steps:
        raise LengthMismatch(
            f"trajectory has {len(poses)} poses, expected {spec.params.episode_steps}"
        )
    return sum(step_reward(spec, goal, pose) for pose in poses)


def cumulative_reward_from_log(spec, log):
    """Cumulative reward of a recorded episode.

    The log stores object poses only at camera steps; between camera frames
    the last camera pose is held (zero-order hold), matching the pose
    resolution actually available.
    """
    steps = spec.params.episode_steps
    period = spec.params.camera_period
    total = 0.0
    for record in log.camera_records:
        pose = Pose(np.array(record.position), np.array(record.orientation))
        span = min(period, steps - record.timestep)
        total += span * step_reward(spec, log.goal, pose)
    return total


def baseline_reward_from_log(spec, log):
    """Cumulative reward had the object stayed at its initial pose.

    Summed over the same camera spans as cumulative_reward_from_log so a
    genuinely static episode matches its baseline bitwise.
    """
    steps = spec.params.episode_steps
    period = spec.params.camera_period
    initial = log.object_pose_at(0)
    reward = step_reward(spec, log.goal, initial)
    total = 0.0
    for record in log.camera_records:
        total += min(period, steps - record.timestep) * reward
    return total


# --- goal sampling ---

GOAL_MARGIN = 0.04  # m, keeps goals away from the arena wall


def _sample_disc(rng, radius):
    r = radius * math.sqrt(rng.uniform(0.0, 1.0))
    theta = rng.uniform(0.0, 2.0 * math.pi)
    return r * math.cos(theta), r * math.sin(theta)


def sample_goal(level, phase, rng, params=None, obj=None):
    """Draw a goal from the level's distribution.

    Level 1: on the table (push task); level 2: fixed 8 cm above the center;
    level 3: random position up to 10 cm height; level 4: level-3 position
    plus uniform orientation.
    """
    if params is None:
        params = EvaluationParams.phase_profile(phase)
    if obj is None:
        obj = ObjectConfig.for_phase(phase)
    radius = params.arena_diameter / 2.0 - GOAL_MARGIN
    resting = obj.resting_half_height
    orientation = rotation.IDENTITY
    if level == 1:
        x, y = _sample_disc(rng, radius)
        z = resting
    elif level == 2:
        x, y, z = 0.0, 0.0, 0.08
    elif level in (3, 4):
        x, y = _sample_disc(rng, radius)
        z = rng.uniform(resting, params.max_height)
        if level == 4:
            orientation = rotation.random_uniform(rng)
    else:
        raise ValueError(f"level must be 1..4, got {level}")
    return Goal(level=level, pose=Pose(np.array([x, y, z]), orientation))


# --- scoring ---


@dataclass(frozen=True)
class ScoreBreakdown:
    """Per-level average cumulative rewards and the weighted total."""

    user: str
    level_rewards: tuple  # (R_1, R_2, R_3, R_4)
    total: float

    @staticmethod
    def from_levels(user, level_rewards):
        rewards = tuple(float(r) for r in level_rewards)
        return ScoreBreakdown(user=user, level_rewards=rewards, total=aggregate_score(*rewards))


def aggregate_score(r1, r2, r3, r4):
    """Difficulty-weighted total: sum of i * R_i over levels i = 1..4."""
    return 1.0 * r1 + 2.0 * r2 + 3.0 * r3 + 4.0 * r4


def render_leaderboard(breakdowns):
    """Plain-text table, best total first."""
    lines = [f"{'#':>3}  {'user':<20} {'L1':>12} {'L2':>12} {'L3':>12} {'L4':>12} {'total':>14}"]
    for rank, b in enumerate(breakdowns, start=1):
        r1, r2, r3, r4 = b.level_rewards
        lines.append(
            f"{rank:>3}. {b.user:<20} {r1:>12.1f} {r2:>12.1f} {r3:>12.1f} {r4:>12.1f} {b.total:>14.1f}"
        )
    return "\n".join(lines)


def leaderboard_to_json(breakdowns):
    rows = [
        {
            "rank": rank,
            "user": b.user,
            "level_1": b.level_rewards[0],
            "level_2": b.level_rewards[1],
            "level_3": b.level_rewards[2],
            "level_4": b.level_rewards[3],
            "total": b.total,
        }
        for rank, b in enumerate(breakdowns, start=1)
    ]
    return json.dumps(rows, indent=2, sort_keys=True)
