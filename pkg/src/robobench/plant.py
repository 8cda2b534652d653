"""Deterministic surrogate dynamics for one tri-finger robot and a free box.

No fidelity to any physical robot is claimed: all constants are design
choices, centralized here and serialized into every episode log header.
The model is a 9-joint robot (three fingers, yaw + two pitch joints each)
with penalty contacts between fingertip spheres, the box and the table,
integrated with semi-implicit Euler at the control rate.
"""

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import rotation
from .core import (
    N_FINGERS,
    N_JOINTS,
    POSITION,
    Action,
    CameraImage,
    CameraObservation,
    ObjectConfig,
    Pose,
    RobotObservation,
)
from .errors import NumericalDivergence

GRAVITY = 9.81  # m/s^2
PENETRATION_TOLERANCE = 0.005  # m
DIVERGENCE_BOUND = 1e6

_UP = np.array([0.0, 0.0, 1.0])
# Finger bases at 120 degree intervals; at J0 = 0 a finger points toward
# the arena center.
_BASE_ANGLES = np.array([0.0, 2.0 * math.pi / 3.0, 4.0 * math.pi / 3.0])

_CORNER_SIGNS = np.array(
    [[sx, sy, sz] for sx in (-1.0, 1.0) for sy in (-1.0, 1.0) for sz in (-1.0, 1.0)]
)

HOME_POSTURE = np.tile([0.0, 0.9, -1.7], N_FINGERS)


@dataclass(frozen=True)
class RobotConfig:
    """All robot and contact constants of the surrogate plant."""

    tau_max: float = 0.36  # N·m
    joint_inertia: float = 0.004  # kg·m^2
    joint_damping: float = 0.1  # N·m·s
    velocity_limit: float = 10.0  # rad/s
    kp: float = 10.0  # N·m/rad
    kd: float = 0.1  # N·m·s/rad
    base_radius: float = 0.15  # m
    base_height: float = 0.34  # m
    link_length_1: float = 0.16  # m
    link_length_2: float = 0.16  # m
    fingertip_radius: float = 0.015  # m
    contact_stiffness: float = 2000.0  # N/m
    contact_damping: float = 10.0  # N·s/m
    friction: float = 0.8

    def __post_init__(self):
        for name in self.__dataclass_fields__:
            if getattr(self, name) <= 0:
                raise ValueError(f"RobotConfig.{name} must be positive")

    def finger_bases(self):
        return np.stack(
            [
                self.base_radius * np.cos(_BASE_ANGLES),
                self.base_radius * np.sin(_BASE_ANGLES),
                np.full(N_FINGERS, self.base_height),
            ],
            axis=-1,
        )


def config_to_text(cfg):
    """Plain-text key-value form, embedded verbatim in episode logs."""
    lines = []
    for name in cfg.__dataclass_fields__:
        value = getattr(cfg, name)
        if isinstance(value, np.ndarray):
            value = " ".join(repr(float(v)) for v in value)
        else:
            value = repr(float(value))
        lines.append(f"{name} = {value}")
    return "\n".join(lines) + "\n"


def config_from_text(text, cls=RobotConfig):
    kwargs = {}
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, _, value = line.partition("=")
        key = key.strip()
        parts = value.split()
        kwargs[key] = np.array([float(p) for p in parts]) if len(parts) > 1 else float(parts[0])
    return cls(**kwargs)


def object_config_to_text(obj):
    return (
        f"half_extents = {' '.join(repr(float(v)) for v in obj.half_extents)}\n"
        f"long_axis = {' '.join(repr(float(v)) for v in obj.long_axis)}\n"
        f"mass = {obj.mass!r}\n"
    )


def object_config_from_text(text):
    return config_from_text(text, cls=ObjectConfig)


@dataclass
class PlantState:
    """Full dynamic state; stepped functionally (step returns a new state)."""

    timestep: int
    joint_pos: np.ndarray
    joint_vel: np.ndarray
    object_position: np.ndarray
    object_orientation: np.ndarray
    object_velocity: np.ndarray  # 6: linear + angular
    tip_force: np.ndarray = field(default_factory=lambda: np.zeros(N_FINGERS))
    rng: object = None  # observation-noise generator, opaque

    @property
    def object_pose(self):
        return Pose(self.object_position.copy(), self.object_orientation.copy())


def resting_height(cfg, obj):
    """Object center height at exact static equilibrium on the table."""
    penetration = obj.mass * GRAVITY / (4.0 * cfg.contact_stiffness)
    return obj.resting_half_height - penetration


def make_initial_state(cfg, obj, seed=None):
    """Home posture, object near the arena center resting on the table.

    The object x/y position is jittered uniformly within +-5 mm from the
    episode seed.
    """
    rng = np.random.default_rng(seed)
    xy = rng.uniform(-0.005, 0.005, 2)
    return PlantState(
        timestep=0,
        joint_pos=HOME_POSTURE.copy(),
        joint_vel=np.zeros(N_JOINTS),
        object_position=np.array([xy[0], xy[1], resting_height(cfg, obj)]),
        object_orientation=rotation.IDENTITY.copy(),
        object_velocity=np.zeros(6),
        rng=rng,
    )


@lru_cache(maxsize=8)
def _cached_bases(cfg):
    bases = cfg.finger_bases()
    bases.flags.writeable = False
    return bases


def forward_kinematics(joint_pos, cfg):
    """World positions of the three fingertips, shape (3, 3)."""
    q = np.asarray(joint_pos, dtype=np.float64).reshape(N_FINGERS, 3)
    yaw = _BASE_ANGLES + math.pi + q[:, 0]
    a1 = q[:, 1]
    a2 = a1 + q[:, 2]
    # In-plane horizontal reach and drop of the two-link chain.
    reach = cfg.link_length_1 * np.sin(a1) + cfg.link_length_2 * np.sin(a2)
    drop = cfg.link_length_1 * np.cos(a1) + cfg.link_length_2 * np.cos(a2)
    tips = _cached_bases(cfg).copy()
    tips[:, 0] += reach * np.cos(yaw)
    tips[:, 1] += reach * np.sin(yaw)
    tips[:, 2] -= drop
    return tips


def fingertip_jacobians(joint_pos, cfg):
    """Analytic tip Jacobians, shape (3, 3, 3): finger, xyz, joint."""
    q = np.asarray(joint_pos, dtype=np.float64).reshape(N_FINGERS, 3)
    yaw = _BASE_ANGLES + math.pi + q[:, 0]
    u = np.stack([np.cos(yaw), np.sin(yaw), np.zeros(N_FINGERS)], axis=-1)
    du = np.stack([-np.sin(yaw), np.cos(yaw), np.zeros(N_FINGERS)], axis=-1)
    a1 = q[:, 1]
    a2 = q[:, 1] + q[:, 2]
    l1, l2 = cfg.link_length_1, cfg.link_length_2
    s1, c1 = np.sin(a1)[:, None], np.cos(a1)[:, None]
    s2, c2 = np.sin(a2)[:, None], np.cos(a2)[:, None]
    d0 = (l1 * s1 + l2 * s2) * du
    d1 = l1 * (c1 * u + s1 * _UP) + l2 * (c2 * u + s2 * _UP)
    d2 = l2 * (c2 * u + s2 * _UP)
    return np.stack([d0, d1, d2], axis=-1)


def pd_controller(desired_pos, state, cfg):
    """Position-to-torque law: Kp (desired - pos) - Kd vel, pre-clamp."""
    desired = np.asarray(desired_pos, dtype=np.float64)
    return cfg.kp * (desired - state.joint_pos) - cfg.kd * state.joint_vel


def safety_clamp(torque, state, cfg):
    """The plant's safety layer; its output is the recorded applied action."""
    tau = np.clip(torque, -cfg.tau_max, cfg.tau_max)
    vel = state.joint_vel
    over = np.abs(vel) > cfg.velocity_limit
    if over.any():
        brake = -cfg.joint_damping * (vel - np.sign(vel) * cfg.velocity_limit)
        tau = np.where(over, tau + brake, tau)
        tau = np.clip(tau, -cfg.tau_max, cfg.tau_max)
    return tau


_inertia_cache = {}


def _box_inertia(obj):
    key = (obj.mass, obj.half_extents.tobytes())
    cached = _inertia_cache.get(key)
    if cached is None:
        hx, hy, hz = obj.half_extents
        m = obj.mass
        cached = (m / 3.0) * np.array([hy * hy + hz * hz, hx * hx + hz * hz, hx * hx + hy * hy])
        cached.flags.writeable = False
        _inertia_cache[key] = cached
    return cached


def step(state, applied_torque, cfg, obj, dt=1e-3):
    """Advance the plant by one control step of duration dt (default 1 kHz).

    The penalty contacts are only stable at millisecond timesteps, so a
    control step longer than 1 ms is integrated as several equal substeps
    of at most 1 ms each (the torque is held constant across them).  The
    timestep counter still advances by one per control step.

    The torque must already be safety-clamped.  Fully deterministic given
    (state, torque, configs, dt).
    """
    n_sub = max(1, int(math.ceil(dt / 1e-3 - 1e-9)))
    if n_sub > 1:
        sub_dt = dt / n_sub
        for _ in range(n_sub - 1):
            inner = _substep(state, applied_torque, cfg, obj, sub_dt)
            state = PlantState(
                timestep=state.timestep,
                joint_pos=inner.joint_pos,
                joint_vel=inner.joint_vel,
                object_position=inner.object_position,
                object_orientation=inner.object_orientation,
                object_velocity=inner.object_velocity,
                tip_force=inner.tip_force,
                rng=state.rng,
            )
        return _substep(state, applied_torque, cfg, obj, sub_dt)
    return _substep(state, applied_torque, cfg, obj, dt)


def _substep(state, applied_torque, cfg, obj, dt):
    tau = np.asarray(applied_torque, dtype=np.float64)
    pos = state.joint_pos
    vel = state.joint_vel
    p = state.object_position
    q = state.object_orientation
    v = state.object_velocity[:3]
    w = state.object_velocity[3:]

    rot = rotation.to_matrix(q)

    force = np.array([0.0, 0.0, -obj.mass * GRAVITY])
    torque_obj = np.zeros(3)
    joint_reaction = np.zeros(N_JOINTS)
    tip_force = np.zeros(N_FINGERS)

    k = cfg.contact_stiffness
    cd = cfg.contact_damping
    mu = cfg.friction
    wx, wy, wz = w

    # Fingertip-sphere vs box penalty contacts.
    tips = forward_kinematics(pos, cfg)
    tips_local = (tips - p) @ rot  # rot^T (tip - p), row per finger
    closest = np.clip(tips_local, -obj.half_extents, obj.half_extents)
    dvec = tips_local - closest
    dist = np.sqrt((dvec * dvec).sum(axis=-1))
    pen = cfg.fingertip_radius - dist
    touching = (pen > 0.0) & (dist > 1e-12)
    if touching.any():
        jac = fingertip_jacobians(pos, cfg)
        tip_vels = np.einsum("fij,fj->fi", jac, vel.reshape(N_FINGERS, 3))
        for f in np.nonzero(touching)[0]:
            n = rot @ (dvec[f] / dist[f])
            r = rot @ closest[f]
            rx, ry, rz = r
            v_obj = v + np.array([wy * rz - wz * ry, wz * rx - wx * rz, wx * ry - wy * rx])
            vrel = tip_vels[f] - v_obj
            vn = vrel @ n
            fn = k * pen[f] - cd * vn
            if fn <= 0.0:
                continue
            vt = vrel - vn * n
            vt_mag = math.sqrt(vt @ vt)
            f_tip = fn * n
            if vt_mag > 1e-12:
                f_tip -= min(mu * fn, cd * vt_mag) * (vt / vt_mag)
            tip_force[f] = fn
            force -= f_tip
            fx, fy, fz = f_tip
            torque_obj -= np.array([ry * fz - rz * fy, rz * fx - rx * fz, rx * fy - ry * fx])
            joint_reaction[3 * f : 3 * f + 3] = jac[f].T @ f_tip

    # Box vs table contacts at the 8 corners, vectorized.
    offsets = (_CORNER_SIGNS * obj.half_extents) @ rot.T  # corner - center, world
    cz = p[2] + offsets[:, 2]
    below = cz < 0.0
    if below.any():
        r = offsets[below]
        vcx = v[0] + wy * r[:, 2] - wz * r[:, 1]
        vcy = v[1] + wz * r[:, 0] - wx * r[:, 2]
        vcz = v[2] + wx * r[:, 1] - wy * r[:, 0]
        fn = np.maximum(-k * cz[below] - cd * vcz, 0.0)
        vt_mag = np.sqrt(vcx * vcx + vcy * vcy)
        scale = np.where(vt_mag > 1e-12, np.minimum(mu * fn, cd * vt_mag) / np.maximum(vt_mag, 1e-12), 0.0)
        fx = -scale * vcx
        fy = -scale * vcy
        force[0] += fx.sum()
        force[1] += fy.sum()
        force[2] += fn.sum()
        torque_obj[0] += (r[:, 1] * fn - r[:, 2] * fy).sum()
        torque_obj[1] += (r[:, 2] * fx - r[:, 0] * fn).sum()
        torque_obj[2] += (r[:, 0] * fy - r[:, 1] * fx).sum()

    # Semi-implicit Euler: velocities first, then positions.
    new_vel = vel + dt * (tau - cfg.joint_damping * vel + joint_reaction) / cfg.joint_inertia
    new_pos = pos + dt * new_vel

    # I_world = R D R^T with D the body-frame diagonal, so the inverse is
    # applied as R D^-1 R^T without a linear solve.
    inertia_body = _box_inertia(obj)
    if wx == 0.0 and wy == 0.0 and wz == 0.0:
        net = torque_obj
    else:
        iw = rot @ (inertia_body * (rot.T @ w))
        net = torque_obj - np.array(
            [wy * iw[2] - wz * iw[1], wz * iw[0] - wx * iw[2], wx * iw[1] - wy * iw[0]]
        )
    ang_acc = rot @ ((rot.T @ net) / inertia_body)
    new_v = v + dt * force / obj.mass
    new_w = w + dt * ang_acc
    new_p = p + dt * new_v
    # Quaternion integration q += 0.5 dt (omega ⊗ q), inlined and renormalized.
    ox, oy, oz = new_w
    qx, qy, qz, qw = q
    h = 0.5 * dt
    nqx = qx + h * (ox * qw + oy * qz - oz * qy)
    nqy = qy + h * (-ox * qz + oy * qw + oz * qx)
    nqz = qz + h * (ox * qy - oy * qx + oz * qw)
    nqw = qw + h * (-ox * qx - oy * qy - oz * qz)
    inv_norm = 1.0 / math.sqrt(nqx * nqx + nqy * nqy + nqz * nqz + nqw * nqw)
    new_q = np.array([nqx * inv_norm, nqy * inv_norm, nqz * inv_norm, nqw * inv_norm])

    new_state = PlantState(
        timestep=state.timestep + 1,
        joint_pos=new_pos,
        joint_vel=new_vel,
        object_position=new_p,
        object_orientation=new_q,
        object_velocity=np.concatenate([new_v, new_w]),
        tip_force=tip_force,
        rng=state.rng,
    )
    _check_divergence(new_state)
    return new_state


def _check_divergence(state):
    for arr in (state.joint_pos, state.joint_vel, state.object_position, state.object_velocity):
        if np.abs(arr).max() > DIVERGENCE_BOUND:
            raise NumericalDivergence(
                f"plant state exceeded {DIVERGENCE_BOUND:g} at timestep {state.timestep}"
            )


def observe(state, applied, camera_period, obj_noise_sigma=0.0, rng=None):
    """Observations of the step that produced `state` (timestep - 1).

    Returns (RobotObservation, CameraObservation or None).  The camera
    observation is emitted exactly when the step index is a multiple of
    camera_period and carries the ground-truth object pose, optionally
    perturbed by Gaussian noise of the given sigma.
    """
    t = state.timestep - 1
    robot_obs = RobotObservation(
        timestep=t,
        position=state.joint_pos.copy(),
        velocity=state.joint_vel.copy(),
        torque=np.asarray(applied, dtype=np.float64).copy(),
        tip_force=state.tip_force.copy(),
    )
    camera_obs = None
    if t % camera_period == 0:
        position = state.object_position.copy()
        orientation = state.object_orientation.copy()
        if obj_noise_sigma > 0.0:
            noise_rng = rng if rng is not None else state.rng
            position = position + noise_rng.normal(0.0, obj_noise_sigma, 3)
            axis = noise_rng.normal(size=3)
            axis /= np.linalg.norm(axis)
            angle = noise_rng.normal(0.0, obj_noise_sigma)
            orientation = rotation.multiply(
                rotation.from_axis_angle(axis, angle), orientation
            )
        camera_obs = CameraObservation(
            timestep=t,
            object_pose=Pose(position, orientation),
            pose_confidence=1.0,
            images=(CameraImage(), CameraImage(), CameraImage()),
        )
    return robot_obs, camera_obs
