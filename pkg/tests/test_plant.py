"""Plant dynamics: equilibrium, free fall, clamping, kinematics, determinism.

Physical fidelity is not a claim; these tests pin the documented numerical
properties of the integrator.
"""

import math

import numpy as np
import pytest

from robobench import plant
from robobench.core import ObjectConfig
from robobench.errors import NumericalDivergence

CFG = plant.RobotConfig()
CUBE = ObjectConfig.cube()
ZERO = np.zeros(9)


def test_static_equilibrium_object_unmoved():
    state = plant.make_initial_state(CFG, CUBE, seed=0)
    p0 = state.object_position.copy()
    q0 = state.object_orientation.copy()
    for _ in range(1000):
        state = plant.step(state, ZERO, CFG, CUBE)
    assert np.max(np.abs(state.object_position - p0)) < 1e-6
    assert np.max(np.abs(state.object_orientation - q0)) < 1e-6


def test_free_fall_matches_closed_form():
    state = plant.make_initial_state(CFG, CUBE, seed=0)
    state.object_position[:] = [0.0, 0.0, 0.2]
    state.object_velocity[:] = 0.0
    dt = 1e-3
    n = 50
    for _ in range(n):
        state = plant.step(state, ZERO, CFG, CUBE, dt=dt)
    assert state.object_velocity[2] == pytest.approx(-plant.GRAVITY * n * dt, abs=1e-9)
    # semi-implicit Euler position: z0 - g*dt^2*(1+2+...+n)
    expected_z = 0.2 - plant.GRAVITY * dt * dt * n * (n + 1) / 2
    assert state.object_position[2] == pytest.approx(expected_z, abs=1e-9)


def test_resting_penetration_bounded():
    state = plant.make_initial_state(CFG, CUBE, seed=3)
    for _ in range(2000):
        state = plant.step(state, ZERO, CFG, CUBE)
    lowest = state.object_position[2] - CUBE.resting_half_height
    assert -plant.PENETRATION_TOLERANCE <= lowest <= 0.0


def test_safety_clamp_respects_torque_limit_fuzz():
    rng = np.random.default_rng(11)
    state = plant.make_initial_state(CFG, CUBE, seed=0)
    for _ in range(2000):
        raw = rng.uniform(-50.0, 50.0, 9)
        state.joint_vel[:] = rng.uniform(-20.0, 20.0, 9)
        clamped = plant.safety_clamp(raw, state, CFG)
        assert np.all(np.abs(clamped) <= CFG.tau_max + 1e-12)


def test_safety_clamp_brakes_overspeed_joints():
    state = plant.make_initial_state(CFG, CUBE, seed=0)
    state.joint_vel[:] = 0.0
    state.joint_vel[0] = CFG.velocity_limit + 5.0
    clamped = plant.safety_clamp(np.full(9, CFG.tau_max), state, CFG)
    assert clamped[0] < 0.0  # braking opposes the excess velocity


def test_forward_kinematics_home_posture():
    tips = plant.forward_kinematics(plant.HOME_POSTURE, CFG)
    assert tips.shape == (3, 3)
    # all three fingertips at equal radius and equal height by symmetry
    radii = np.linalg.norm(tips[:, :2], axis=1)
    assert np.allclose(radii, radii[0], atol=1e-12)
    assert np.allclose(tips[:, 2], tips[0, 2], atol=1e-12)
    assert np.all(tips[:, 2] > 0.0)


def test_fingertip_jacobians_match_finite_differences():
    rng = np.random.default_rng(5)
    joints = rng.uniform(-1.0, 1.0, 9)
    jac = plant.fingertip_jacobians(joints, CFG)
    eps = 1e-7
    for j in range(9):
        bumped = joints.copy()
        bumped[j] += eps
        numeric = (
            plant.forward_kinematics(bumped, CFG) - plant.forward_kinematics(joints, CFG)
        ) / eps
        finger = j // 3
        assert np.allclose(jac[finger][:, j % 3], numeric[finger], atol=1e-5)
        # joints of one finger never move another finger's tip
        other = (finger + 1) % 3
        assert np.allclose(numeric[other], 0.0, atol=1e-6)


def test_step_deterministic_bitwise():
    a = plant.make_initial_state(CFG, CUBE, seed=9)
    b = plant.make_initial_state(CFG, CUBE, seed=9)
    rng = np.random.default_rng(1)
    torques = rng.uniform(-0.3, 0.3, (200, 9))
    for tau in torques:
        a = plant.step(a, tau, CFG, CUBE)
    for tau in torques:
        b = plant.step(b, tau, CFG, CUBE)
    assert np.array_equal(a.joint_pos, b.joint_pos)
    assert np.array_equal(a.object_position, b.object_position)
    assert np.array_equal(a.object_orientation, b.object_orientation)


def test_long_control_step_equals_substeps_bitwise():
    a = plant.make_initial_state(CFG, CUBE, seed=4)
    b = plant.make_initial_state(CFG, CUBE, seed=4)
    tau = np.full(9, 0.05)
    for _ in range(50):
        a = plant.step(a, tau, CFG, CUBE, dt=4e-3)
    for _ in range(200):
        b = plant.step(b, tau, CFG, CUBE, dt=1e-3)
    assert np.array_equal(a.joint_pos, b.joint_pos)
    assert np.array_equal(a.object_position, b.object_position)
    assert a.timestep == 50 and b.timestep == 200


def test_contact_stable_at_low_control_rate():
    # a fingertip pressed into the object at a 4 ms control step must not
    # launch it; this is the substepping guarantee
    from robobench.controllers import finger_ik

    state = plant.make_initial_state(CFG, CUBE, seed=4)
    obj0 = state.object_position.copy()
    bases = CFG.finger_bases()
    finger = 2
    direction = obj0[:2] - bases[finger, :2]
    direction /= np.linalg.norm(direction)
    joints = plant.HOME_POSTURE.copy()
    cursor = np.array([*(obj0[:2] - direction * 0.0675), obj0[2] + 0.006])
    joints[3 * finger : 3 * finger + 3] = finger_ik(cursor, finger, CFG)
    for i in range(2500):
        if i % 10 == 0 and i > 800:
            cursor[:2] += direction * 0.0016
            ik = finger_ik(cursor, finger, CFG)
            if ik is not None:
                joints[3 * finger : 3 * finger + 3] = ik
        tau = plant.safety_clamp(plant.pd_controller(joints, state, CFG), state, CFG)
        state = plant.step(state, tau, CFG, CUBE, dt=4e-3)
        assert np.linalg.norm(state.object_velocity[:3]) < 0.15


def test_make_initial_state_seeded_jitter():
    a = plant.make_initial_state(CFG, CUBE, seed=1)
    b = plant.make_initial_state(CFG, CUBE, seed=1)
    c = plant.make_initial_state(CFG, CUBE, seed=2)
    assert np.array_equal(a.object_position, b.object_position)
    assert not np.array_equal(a.object_position, c.object_position)
    assert np.linalg.norm(a.object_position[:2]) <= 0.005 * math.sqrt(2) + 1e-12


def test_divergence_detected():
    state = plant.make_initial_state(CFG, CUBE, seed=0)
    state.joint_vel[:] = 1e7
    with pytest.raises(NumericalDivergence):
        plant.step(state, ZERO, CFG, CUBE)


def test_config_text_round_trip():
    text = plant.config_to_text(CFG)
    parsed = plant.config_from_text(text)
    assert parsed == CFG
    obj_text = plant.object_config_to_text(CUBE)
    parsed_obj = plant.object_config_from_text(obj_text)
    assert parsed_obj.mass == CUBE.mass
    assert np.array_equal(parsed_obj.half_extents, CUBE.half_extents)


def test_observe_camera_cadence():
    state = plant.make_initial_state(CFG, CUBE, seed=0)
    state = plant.step(state, ZERO, CFG, CUBE)
    obs, camera = plant.observe(state, ZERO, camera_period=25)
    assert obs.timestep == 0
    assert camera is not None  # step 0 is a camera step
    state = plant.step(state, ZERO, CFG, CUBE)
    _, camera = plant.observe(state, ZERO, camera_period=25)
    assert camera is None
