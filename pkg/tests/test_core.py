"""Core domain types: actions, poses, episode parameters, object configs."""

import numpy as np
import pytest

from robobench.core import (
    Action,
    EvaluationParams,
    Goal,
    ObjectConfig,
    Pose,
    goal_in_arena,
    validate_action,
    POSITION,
    TORQUE,
)
from robobench.errors import WrongDimension


def test_zero_torque_action():
    action = Action.zero_torque()
    assert action.kind == TORQUE
    assert np.array_equal(action.values, np.zeros(9))
    assert action.valid


def test_action_values_are_read_only():
    action = Action.zero_torque()
    with pytest.raises(ValueError):
        action.values[0] = 1.0


def test_validate_action_wrong_dimension():
    with pytest.raises(WrongDimension):
        validate_action(Action(TORQUE, np.zeros(7)))


def test_validate_action_nan_replaced_and_flagged():
    values = np.zeros(9)
    values[3] = np.nan
    checked = validate_action(Action(TORQUE, values))
    assert checked.values[3] == 0.0
    assert not checked.valid


def test_validate_action_position_kind_passthrough():
    checked = validate_action(Action(POSITION, np.linspace(-1, 1, 9)))
    assert checked.kind == POSITION
    assert checked.valid


def test_pose_identity_and_normalized():
    pose = Pose.identity()
    assert pose.is_normalized()
    assert np.array_equal(pose.position, np.zeros(3))


def test_phase_profiles():
    p1 = EvaluationParams.phase_profile(1)
    assert (p1.control_rate, p1.episode_steps) == (250, 3750)
    assert p1.dt == pytest.approx(0.004)
    assert p1.camera_period == 25
    for phase in (2, 3):
        p = EvaluationParams.phase_profile(phase)
        assert (p.control_rate, p.episode_steps) == (1000, 120000)
        assert p.camera_period == 100


def test_default_reward_normalizers():
    params = EvaluationParams()
    assert params.arena_diameter == pytest.approx(0.39)
    assert params.max_height == pytest.approx(0.1)


def test_object_configs():
    cube = ObjectConfig.cube()
    assert np.allclose(cube.half_extents, 0.0325)
    assert cube.resting_half_height == pytest.approx(0.0325)
    cuboid = ObjectConfig.cuboid()
    assert np.allclose(2 * cuboid.half_extents, [0.02, 0.02, 0.08])
    assert np.allclose(cuboid.long_axis, [0.0, 0.0, 1.0])
    assert ObjectConfig.for_phase(1).mass == cube.mass
    assert ObjectConfig.for_phase(3).mass == cuboid.mass


def test_goal_in_arena():
    params = EvaluationParams()
    inside = Goal(level=1, pose=Pose.identity((0.0, 0.0, 0.0325)))
    outside = Goal(level=1, pose=Pose.identity((0.5, 0.0, 0.0325)))
    assert goal_in_arena(inside, params)
    assert not goal_in_arena(outside, params)


def test_goal_level_range():
    with pytest.raises(ValueError):
        Goal(level=5, pose=Pose.identity())
