"""Built-in demo controllers for testing and the evaluation harness.

Each controller is a callable taking a frontend (anything implementing
append_desired_action / get_robot_observation / get_camera_observation /
episode_info) and running the episode to completion.  They stand in for
user-submitted policies.
"""

import math

import numpy as np

from .core import POSITION, Action
from .errors import EpisodeFinished
from .plant import HOME_POSTURE, _BASE_ANGLES

REGISTRY = {}


def register(name):
    def wrap(fn):
        REGISTRY[name] = fn
        return fn

    return wrap


def get_controller(name):
    try:
        return REGISTRY[name]
    except KeyError:
        raise KeyError(f"unknown built-in controller {name!r}; have {sorted(REGISTRY)}")


@register("zero_torque")
def zero_torque(frontend, params=None):
    """Do nothing: append zero torque every step, fetching each observation."""
    action = Action.zero_torque()
    try:
        while True:
            t = frontend.append_desired_action(action)
            frontend.get_robot_observation(t)
    except EpisodeFinished:
        pass


@register("hold_position")
def hold_position(frontend, params=None):
    """Servo the joints to their initial positions with position actions."""
    try:
        t = frontend.append_desired_action(Action.zero_torque())
        obs = frontend.get_robot_observation(t)
        action = Action(POSITION, obs.position)
        while True:
            t = frontend.append_desired_action(action)
            frontend.get_robot_observation(t)
    except EpisodeFinished:
        pass


def wrap_angle(a):
    return (a + math.pi) % (2.0 * math.pi) - math.pi


def finger_ik(target, finger, cfg):
    """Joint angles (yaw, pitch1, pitch2) placing the fingertip at target.

    Returns None if the target is out of reach.  Elbow is flexed the same
    way as the home posture (pitch2 < 0).
    """
    bases = cfg.finger_bases()
    delta = np.asarray(target, dtype=np.float64) - bases[finger]
    s = math.hypot(delta[0], delta[1])
    yaw = math.atan2(delta[1], delta[0]) if s > 1e-9 else _BASE_ANGLES[finger] + math.pi
    j0 = wrap_angle(yaw - (_BASE_ANGLES[finger] + math.pi))
    l1, l2 = cfg.link_length_1, cfg.link_length_2
    r2 = s * s + delta[2] * delta[2]
    c2 = (r2 - l1 * l1 - l2 * l2) / (2.0 * l1 * l2)
    if not -1.0 <= c2 <= 1.0:
        return None
    j2 = -math.acos(c2)
    phi = math.atan2(s, -delta[2])  # angle of the target from straight down
    j1 = phi - math.atan2(l2 * math.sin(j2), l1 + l2 * math.cos(j2))
    return np.array([j0, j1, j2])


@register("push")
def push_toward_goal(frontend, params=None):
    """Scripted demo: push the object along the table toward the goal.

    Repeated quasi-static sweeps: pick a finger that can reach a point
    behind the object on the object-to-goal line, creep the tip along that
    line, and retreat when the object nears the goal or the arm runs out
    of reach.  The commanded tip position never leads the measured tip by
    more than a few millimetres, so the position controller cannot wind
    up and bat the object away.  Contact happens low on the object face,
    below the topple threshold (half width / friction above the table).
    """
    from . import plant as plant_mod

    cfg = plant_mod.RobotConfig() if not params else params.get("robot_config", plant_mod.RobotConfig())
    info = frontend.episode_info()
    goal_xy = np.asarray(info.goal.pose.position[:2], dtype=np.float64)
    bases = cfg.finger_bases()
    tick = 10  # control decisions every `tick` plant steps
    half_width = 0.0325  # assumed object half extent along the push
    tip_r = cfg.fingertip_radius

    try:
        t = frontend.append_desired_action(Action.zero_torque())
        obs = frontend.get_robot_observation(t)
        camera = frontend.get_camera_observation(t)
        push_height = float(camera.object_pose.position[2]) + 0.006
        mode = "idle"
        finger = 0
        cursor = plant_mod.forward_kinematics(obs.position, cfg)[0]
        direction = np.zeros(2)
        start_xy = stop_xy = goal_xy
        park_to = None
        advanced = sweep_len = 0.0
        stalled = 0
        while True:
            obs = frontend.get_robot_observation(t)
            camera = frontend.get_camera_observation(t)
            obj_xy = np.asarray(camera.object_pose.position[:2], dtype=np.float64)
            dist = float(np.linalg.norm(goal_xy - obj_xy))
            joints = HOME_POSTURE.copy()
            if mode == "idle":
                if dist > 0.015:
                    direction = (goal_xy - obj_xy) / dist
                    start_xy = obj_xy - direction * (half_width + tip_r + 0.03)
                    # Sweep slightly past where the object lands on the goal.
                    stop_xy = goal_xy - direction * (half_width + tip_r - 0.004)
                    sweep_len = float(np.linalg.norm(stop_xy - start_xy))
                    entry = np.array([start_xy[0], start_xy[1], push_height])
                    reachable = [
                        f
                        for f in range(3)
                        if finger_ik(entry, f, cfg) is not None
                        and (bases[f, :2] - obj_xy) @ direction < 0.0
                    ]
                    behind = [
                        f for f in range(3) if (bases[f, :2] - obj_xy) @ direction < 0.0
                    ]
                    candidates = reachable or behind or list(range(3))
                    finger = max(
                        candidates,
                        key=lambda f: (bases[f, :2] - obj_xy) @ (-direction),
                    )
                    cursor = plant_mod.forward_kinematics(obs.position, cfg)[finger]
                    advanced = 0.0
                    stalled = 0
                    mode = "approach"
            elif mode == "approach":
                tip_now = plant_mod.forward_kinematics(obs.position, cfg)[finger]
                target = np.array([start_xy[0], start_xy[1], push_height])
                delta = target - cursor
                step_len = np.linalg.norm(delta)
                if np.linalg.norm(cursor - tip_now) < 0.01:
                    if step_len > 0.002:
                        delta *= 0.002 / step_len
                    cursor = cursor + delta
                    stalled = 0
                else:
                    stalled += 1
                if step_len < 0.003:
                    mode = "push"
                elif stalled > 120:
                    park_to = cursor.copy()
                    park_to[2] = min(push_height + 0.04, 0.1)
                    mode = "park"
            elif mode == "push":
                tip_now = plant_mod.forward_kinematics(obs.position, cfg)[finger]
                ahead = np.array([direction[0], direction[1], 0.0])
                can_advance = (
                    np.linalg.norm(cursor - tip_now) < 0.006
                    and finger_ik(cursor + ahead * 0.0004, finger, cfg) is not None
                )
                if can_advance:
                    cursor = cursor + ahead * 0.0004
                    advanced += 0.0004
                    stalled = 0
                else:
                    stalled += 1
                if dist < 0.015 or advanced >= sweep_len or stalled > 60:
                    park_to = cursor - ahead * 0.05
                    mode = "park"
            else:
                delta = park_to - cursor
                step_len = np.linalg.norm(delta)
                if step_len > 0.001:
                    cursor = cursor + delta * (0.001 / step_len)
                else:
                    mode = "idle"
            if mode != "idle":
                ik = finger_ik(cursor, finger, cfg)
                if ik is not None:
                    joints[3 * finger : 3 * finger + 3] = ik
            action = Action(POSITION, joints)
            for _ in range(tick):
                t = frontend.append_desired_action(action)
            frontend.get_robot_observation(t)
    except EpisodeFinished:
        pass
