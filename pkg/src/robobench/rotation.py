"""Quaternion utilities, scalar-last convention (x, y, z, w).

All functions accept either a single quaternion of shape (4,) or a batch
of shape (..., 4) and operate elementwise over the batch.
"""

import numpy as np

IDENTITY = np.array([0.0, 0.0, 0.0, 1.0])


def normalize(q):
    """Scale to unit norm; bitwise idempotent.

    Inputs already within 1e-12 of unit norm are returned unchanged, so
    normalize(normalize(q)) == normalize(q) exactly.
    """
    q = np.asarray(q, dtype=np.float64)
    norm = np.linalg.norm(q, axis=-1, keepdims=True)
    return np.where(np.abs(norm - 1.0) <= 1e-12, q, q / norm)


def conjugate(q):
    q = np.asarray(q, dtype=np.float64)
    out = -q.copy()
    out[..., 3] = q[..., 3]
    return out


def multiply(q1, q2):
    """Hamilton product q1 ⊗ q2 (apply q2 first, then q1)."""
    q1 = np.asarray(q1, dtype=np.float64)
    q2 = np.asarray(q2, dtype=np.float64)
    x1, y1, z1, w1 = q1[..., 0], q1[..., 1], q1[..., 2], q1[..., 3]
    x2, y2, z2, w2 = q2[..., 0], q2[..., 1], q2[..., 2], q2[..., 3]
    return np.stack(
        [
            w1 * x2 + x1 * w2 + y1 * z2 - z1 * y2,
            w1 * y2 - x1 * z2 + y1 * w2 + z1 * x2,
            w1 * z2 + x1 * y2 - y1 * x2 + z1 * w2,
            w1 * w2 - x1 * x2 - y1 * y2 - z1 * z2,
        ],
        axis=-1,
    )


def from_axis_angle(axis, angle):
    axis = np.asarray(axis, dtype=np.float64)
    axis = axis / np.linalg.norm(axis, axis=-1, keepdims=True)
    angle = np.asarray(angle, dtype=np.float64)
    half = angle / 2.0
    xyz = axis * np.sin(half)[..., None]
    return np.concatenate([xyz, np.cos(half)[..., None]], axis=-1)


def rotate_vector(q, v):
    """Rotate vector(s) v by quaternion(s) q."""
    q = np.asarray(q, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    u = q[..., :3]
    w = q[..., 3:4]
    # v' = v + 2 u × (u × v + w v)
    t = np.cross(u, v) + w * v
    return v + 2.0 * np.cross(u, t)


def to_matrix(q):
    """3x3 rotation matrix of a unit quaternion."""
    x, y, z, w = q
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)],
            [2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)],
            [2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)],
        ]
    )


def random_uniform(rng, size=None):
    """Quaternion(s) uniform on the rotation group (Shoemake's method)."""
    shape = () if size is None else (size,)
    u1 = rng.uniform(0.0, 1.0, shape)
    u2 = rng.uniform(0.0, 2.0 * np.pi, shape)
    u3 = rng.uniform(0.0, 2.0 * np.pi, shape)
    a = np.sqrt(1.0 - u1)
    b = np.sqrt(u1)
    return np.stack(
        [a * np.sin(u2), a * np.cos(u2), b * np.sin(u3), b * np.cos(u3)],
        axis=-1,
    )


def integrate_angular_velocity(q, omega, dt):
    """Advance unit quaternion q by world-frame angular velocity omega over dt."""
    q = np.asarray(q, dtype=np.float64)
    omega_quat = np.array([omega[0], omega[1], omega[2], 0.0])
    dq = 0.5 * dt * multiply(omega_quat, q)
    return normalize(q + dq)
