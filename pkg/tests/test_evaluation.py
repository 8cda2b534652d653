"""Reward math against hand-derived oracles, property fuzzing, and the
published final-evaluation tables."""

import math

import numpy as np
import pytest

from robobench import evaluation, rotation
from robobench.core import EvaluationParams, Goal, ObjectConfig, Pose
from robobench.errors import LengthMismatch

# -- hand-derived oracles (1e-12) --


def test_position_error_xy_only():
    # xy distance 0.1 over diameter 0.39, no height term
    err = evaluation.position_error([0.1, 0.0, 0.05], [0.0, 0.0, 0.05])
    assert err == pytest.approx(0.1282051282051282, abs=1e-12)


def test_position_error_height_only():
    # height gap 0.05 over 0.1 halves to 0.25
    err = evaluation.position_error([0.0, 0.0, 0.1], [0.0, 0.0, 0.05])
    assert err == pytest.approx(0.25, abs=1e-12)


def test_position_error_combined():
    # 3-4-5 triangle in xy: hypot(0.03, 0.04) = 0.05; plus 0.02 height gap
    err = evaluation.position_error([0.03, 0.04, 0.06], [0.0, 0.0, 0.04])
    assert err == pytest.approx(0.5 * (0.05 / 0.39) + 0.5 * 0.2, abs=1e-12)


def test_rotation_error_quarter_turn():
    q = rotation.from_axis_angle([0.0, 0.0, 1.0], math.pi / 2)
    assert evaluation.rotation_error(q, rotation.IDENTITY) == pytest.approx(0.5, abs=1e-12)


def test_rotation_error_half_turn_is_max():
    q = rotation.from_axis_angle([1.0, 0.0, 0.0], math.pi)
    assert evaluation.rotation_error(q, rotation.IDENTITY) == pytest.approx(1.0, abs=1e-12)


def test_rotation_error_same_quaternion_zero():
    rng = np.random.default_rng(0)
    for _ in range(20):
        q = rotation.random_uniform(rng)
        assert evaluation.rotation_error(q, q) == pytest.approx(0.0, abs=1e-12)


def test_rotation_error_double_cover():
    # q and -q are the same rotation
    rng = np.random.default_rng(1)
    q = rotation.random_uniform(rng)
    assert evaluation.rotation_error(q, -q) == pytest.approx(0.0, abs=1e-12)


def test_long_axis_error_quarter_turn():
    q = rotation.from_axis_angle([1.0, 0.0, 0.0], math.pi / 2)
    err = evaluation.long_axis_error(q, rotation.IDENTITY, [0.0, 0.0, 1.0])
    assert err == pytest.approx(0.5, abs=1e-12)


def test_long_axis_error_ignores_spin():
    spin = rotation.from_axis_angle([0.0, 0.0, 1.0], 1.234)
    err = evaluation.long_axis_error(spin, rotation.IDENTITY, [0.0, 0.0, 1.0])
    assert err == pytest.approx(0.0, abs=1e-12)


def _goal(level, position, orientation=rotation.IDENTITY):
    return Goal(level=level, pose=Pose(np.array(position), np.array(orientation)))


def test_step_reward_level1_is_negated_position_error():
    spec = evaluation.RewardSpec(phase=2, level=1)
    goal = _goal(1, [0.1, 0.0, 0.0325])
    pose = Pose.identity((0.0, 0.0, 0.0325))
    assert evaluation.step_reward(spec, goal, pose) == pytest.approx(
        -0.1282051282051282, abs=1e-12
    )


def test_step_reward_level4_averages_position_and_rotation():
    spec = evaluation.RewardSpec(phase=2, level=4)
    q = rotation.from_axis_angle([0.0, 0.0, 1.0], math.pi / 2)
    goal = _goal(4, [0.0, 0.0, 0.08], q)
    pose = Pose.identity((0.0, 0.0, 0.08))
    # e_pos = 0, e_rot = 0.5
    assert evaluation.step_reward(spec, goal, pose) == pytest.approx(-0.25, abs=1e-12)


def test_step_reward_phase3_level4_uses_long_axis():
    spec = evaluation.RewardSpec(phase=3, level=4)
    assert spec.uses_long_axis
    spin = rotation.from_axis_angle([0.0, 0.0, 1.0], 2.0)  # spin about the long axis
    goal = _goal(4, [0.0, 0.0, 0.08], spin)
    pose = Pose.identity((0.0, 0.0, 0.08))
    assert evaluation.step_reward(spec, goal, pose) == pytest.approx(0.0, abs=1e-12)


def test_step_reward_never_positive():
    rng = np.random.default_rng(2)
    spec = evaluation.RewardSpec(phase=2, level=4)
    for _ in range(200):
        goal = _goal(4, rng.uniform(-0.2, 0.2, 3), rotation.random_uniform(rng))
        pose = Pose(rng.uniform(-0.2, 0.2, 3), rotation.random_uniform(rng))
        assert evaluation.step_reward(spec, goal, pose) <= 0.0


# -- fuzz suites --


def test_fuzz_rotation_error_range_and_symmetry():
    rng = np.random.default_rng(3)
    n = 100000
    qs = rng.normal(size=(n, 4))
    qs /= np.linalg.norm(qs, axis=1, keepdims=True)
    for i in range(0, n, 2):
        e = evaluation.rotation_error(qs[i], qs[i + 1])
        assert 0.0 <= e <= 1.0
    for i in range(0, 2000, 2):
        a, b = qs[i], qs[i + 1]
        assert evaluation.rotation_error(a, b) == pytest.approx(
            evaluation.rotation_error(b, a), abs=1e-12
        )


def test_fuzz_position_error_translation_invariance():
    rng = np.random.default_rng(4)
    for _ in range(2000):
        goal = rng.uniform(-0.2, 0.2, 3)
        actual = rng.uniform(-0.2, 0.2, 3)
        offset = rng.uniform(-0.1, 0.1, 3)
        assert evaluation.position_error(goal, actual) == pytest.approx(
            evaluation.position_error(goal + offset, actual + offset), abs=1e-12
        )


def test_fuzz_long_axis_error_range():
    rng = np.random.default_rng(5)
    axis = np.array([0.0, 0.0, 1.0])
    for _ in range(5000):
        a = rotation.random_uniform(rng)
        b = rotation.random_uniform(rng)
        e = evaluation.long_axis_error(a, b, axis)
        assert 0.0 <= e <= 1.0


# -- cumulative reward --


def test_cumulative_reward_requires_full_trajectory():
    params = EvaluationParams(control_rate=1000, episode_steps=10)
    spec = evaluation.RewardSpec(phase=2, level=1, params=params)
    goal = _goal(1, [0.0, 0.0, 0.0325])
    poses = [Pose.identity((0.0, 0.0, 0.0325))] * 9
    with pytest.raises(LengthMismatch):
        evaluation.cumulative_reward(spec, goal, poses)


def test_cumulative_reward_static_trajectory():
    params = EvaluationParams(control_rate=1000, episode_steps=10)
    spec = evaluation.RewardSpec(phase=2, level=1, params=params)
    goal = _goal(1, [0.1, 0.0, 0.0325])
    pose = Pose.identity((0.0, 0.0, 0.0325))
    total = evaluation.cumulative_reward(spec, goal, [pose] * 10)
    assert total == pytest.approx(10 * evaluation.step_reward(spec, goal, pose), abs=1e-12)


# -- goal sampling --


def test_sample_goal_level1_on_table():
    rng = np.random.default_rng(6)
    obj = ObjectConfig.cube()
    for _ in range(200):
        goal = evaluation.sample_goal(1, 2, rng)
        x, y, z = goal.pose.position
        assert math.hypot(x, y) <= 0.39 / 2 - evaluation.GOAL_MARGIN + 1e-12
        assert z == pytest.approx(obj.resting_half_height)
        assert np.array_equal(goal.pose.orientation, rotation.IDENTITY)


def test_sample_goal_level2_fixed():
    rng = np.random.default_rng(7)
    goal = evaluation.sample_goal(2, 2, rng)
    assert np.allclose(goal.pose.position, [0.0, 0.0, 0.08])


def test_sample_goal_level3_height_range():
    rng = np.random.default_rng(8)
    obj = ObjectConfig.cube()
    zs = [evaluation.sample_goal(3, 2, rng).pose.position[2] for _ in range(500)]
    assert min(zs) >= obj.resting_half_height
    assert max(zs) <= 0.1


def test_sample_goal_level4_random_orientation():
    rng = np.random.default_rng(9)
    goals = [evaluation.sample_goal(4, 2, rng) for _ in range(20)]
    assert any(not np.allclose(g.pose.orientation, rotation.IDENTITY) for g in goals)
    for g in goals:
        assert abs(np.linalg.norm(g.pose.orientation) - 1.0) < 1e-9


def test_sample_goal_deterministic_for_seed():
    a = evaluation.sample_goal(3, 2, np.random.default_rng(42))
    b = evaluation.sample_goal(3, 2, np.random.default_rng(42))
    assert np.array_equal(a.pose.position, b.pose.position)


# -- scoring and the published tables --

PHASE2_TABLE = [
    ("ardentstork", -5472, -2898, -9080, -21428, -124221),
    ("troubledhare", -3927, -4144, -4226, -48572, -219182),
    ("sombertortoise", -8544, -15199, -14075, -44989, -261123),
    ("sincerefish", -6278, -13738, -17927, -49491, -285500),
    ("hushedtomatoe", -17976, -41389, -41832, -60815, -469509),
    ("giddyicecream", -22379, -46650, -41655, -61845, -488023),
]

PHASE3_TABLE = [
    ("ardentstork", -9239, -4040, -6525, -25625, -139394),
    ("sombertortoise", -5461, -8522, -10323, -36135, -198016),
    ("sincerefish", -7428, -25291, -26768, -52311, -347560),
    ("innocenttortoise", -16872, -31977, -33357, -55611, -403344),
    ("hushedtomatoe", -18304, -31917, -36835, -60219, -433521),
    ("troubledhare", -18742, -42831, -36272, -56503, -439233),
    ("giddyicecream", -33329, -57372, -53694, -59734, -548090),
]


def test_aggregate_score_weights():
    assert evaluation.aggregate_score(-1.0, 0.0, 0.0, 0.0) == -1.0
    assert evaluation.aggregate_score(0.0, 0.0, 0.0, -1.0) == -4.0
    assert evaluation.aggregate_score(-1.0, -1.0, -1.0, -1.0) == -10.0


@pytest.mark.parametrize("row", PHASE2_TABLE + PHASE3_TABLE, ids=lambda r: r[0])
def test_published_totals_reproduce(row):
    user, r1, r2, r3, r4, published = row
    total = evaluation.aggregate_score(r1, r2, r3, r4)
    assert abs(total - published) <= 5, user


def test_leaderboard_ranking_order():
    rows = [
        evaluation.ScoreBreakdown.from_levels(user, (r1, r2, r3, r4))
        for user, r1, r2, r3, r4, _ in PHASE2_TABLE
    ]
    rendered = evaluation.render_leaderboard(sorted(rows, key=lambda b: -b.total))
    lines = rendered.splitlines()
    assert "ardentstork" in lines[1]
    assert "giddyicecream" in lines[-1]


def test_leaderboard_json_columns():
    import json

    rows = [evaluation.ScoreBreakdown.from_levels("solo", (-1.0, -2.0, -3.0, -4.0))]
    data = json.loads(evaluation.leaderboard_to_json(rows))
    assert data[0]["rank"] == 1
    assert data[0]["total"] == -30.0
    assert set(data[0]) == {"rank", "user", "level_1", "level_2", "level_3", "level_4", "total"}
