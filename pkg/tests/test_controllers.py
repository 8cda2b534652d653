"""Built-in controllers and the episode drivers around them."""

import math
import sys
import textwrap

import numpy as np
import pytest

from robobench import controllers, plant
from robobench.core import EvaluationParams
from robobench.episode import build_backend, run_episode_builtin, run_episode_external

CFG = plant.RobotConfig()
TINY = EvaluationParams(control_rate=250, episode_steps=50)


def make_backend(steps=50, **kwargs):
    params = EvaluationParams(control_rate=250, episode_steps=steps)
    return build_backend(phase=1, level=1, seed=0, params=params, **kwargs)


def test_registry_contents():
    assert {"zero_torque", "hold_position", "push"} <= set(controllers.REGISTRY)
    with pytest.raises(KeyError):
        controllers.get_controller("nope")


def test_wrap_angle():
    assert controllers.wrap_angle(0.0) == 0.0
    assert controllers.wrap_angle(2 * math.pi) == pytest.approx(0.0, abs=1e-12)
    assert controllers.wrap_angle(math.pi + 0.1) == pytest.approx(-math.pi + 0.1, abs=1e-12)


def test_finger_ik_round_trips_through_fk():
    rng = np.random.default_rng(0)
    hits = 0
    for _ in range(200):
        base = CFG.finger_bases()[1]
        target = np.array(
            [
                base[0] + rng.uniform(-0.15, 0.0),
                base[1] + rng.uniform(-0.05, 0.05),
                rng.uniform(0.03, 0.25),
            ]
        )
        joints = controllers.finger_ik(target, 1, CFG)
        if joints is None:
            continue
        hits += 1
        full = plant.HOME_POSTURE.copy()
        full[3:6] = joints
        tip = plant.forward_kinematics(full, CFG)[1]
        assert np.allclose(tip, target, atol=1e-9)
    assert hits > 50  # most of the sampled box is reachable


def test_finger_ik_unreachable_returns_none():
    assert controllers.finger_ik(np.array([10.0, 0.0, 0.1]), 0, CFG) is None


def test_zero_torque_episode_applies_zeros():
    backend = make_backend()
    log = run_episode_builtin(controllers.get_controller("zero_torque"), backend)
    assert log.finalized
    assert np.array_equal(log.steps["applied"], np.zeros((50, 9)))


def test_hold_position_keeps_joints_near_start():
    backend = make_backend(steps=200)
    log = run_episode_builtin(controllers.get_controller("hold_position"), backend)
    start = log.steps["position"][0]
    drift = np.abs(log.steps["position"] - start).max()
    assert drift < 0.05


def test_push_toward_goal_runs_clean():
    backend = make_backend(steps=250)
    log = run_episode_builtin(controllers.get_controller("push"), backend)
    assert log.finalized
    # torques stay within the safety limit throughout
    assert np.abs(log.steps["applied"]).max() <= CFG.tau_max + 1e-12


def test_run_episode_external_round_trip(tmp_path):
    script = tmp_path / "client.py"
    script.write_text(
        textwrap.dedent(
            """
            from robobench.core import Action
            from robobench.errors import EpisodeFinished
            from robobench.wire import WireFrontend

            frontend = WireFrontend.connect_stdio()
            try:
                while True:
                    t = frontend.append_desired_action(Action.zero_torque())
                    frontend.get_robot_observation(t)
            except EpisodeFinished:
                pass
            """
        )
    )
    backend = make_backend()
    log = run_episode_external(f"{sys.executable} {script}", backend, connect_timeout=30.0)
    assert log.finalized
    assert log.n_steps == 50
    assert np.array_equal(log.steps["applied"], np.zeros((50, 9)))
