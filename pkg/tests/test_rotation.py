"""Quaternion utilities: hand-derived oracles plus property fuzzing."""

import math

import numpy as np
import pytest

from robobench import rotation


def test_identity_is_normalized():
    assert np.array_equal(rotation.IDENTITY, [0.0, 0.0, 0.0, 1.0])


def test_normalize_unit_input_returned_unchanged():
    q = np.array([0.0, 0.0, 0.0, 1.0])
    assert rotation.normalize(q) is not None
    assert np.array_equal(rotation.normalize(q), q)


def test_normalize_scales_to_unit():
    q = rotation.normalize(np.array([2.0, 0.0, 0.0, 0.0]))
    assert np.allclose(q, [1.0, 0.0, 0.0, 0.0])


def test_normalize_idempotent_bitwise_fuzz():
    rng = np.random.default_rng(7)
    qs = rng.normal(size=(100000, 4))
    once = np.array([rotation.normalize(q) for q in qs[:2000]])
    twice = np.array([rotation.normalize(q) for q in once])
    assert np.array_equal(once, twice)


def test_multiply_identity():
    rng = np.random.default_rng(1)
    q = rotation.random_uniform(rng)
    assert np.allclose(rotation.multiply(q, rotation.IDENTITY), q)
    assert np.allclose(rotation.multiply(rotation.IDENTITY, q), q)


def test_multiply_by_conjugate_gives_identity():
    rng = np.random.default_rng(2)
    for _ in range(50):
        q = rotation.random_uniform(rng)
        prod = rotation.multiply(q, rotation.conjugate(q))
        assert np.allclose(prod, rotation.IDENTITY, atol=1e-12)


def test_from_axis_angle_quarter_turn_z():
    q = rotation.from_axis_angle([0.0, 0.0, 1.0], math.pi / 2)
    s = math.sin(math.pi / 4)
    assert np.allclose(q, [0.0, 0.0, s, math.cos(math.pi / 4)])
    v = rotation.rotate_vector(q, [1.0, 0.0, 0.0])
    assert np.allclose(v, [0.0, 1.0, 0.0], atol=1e-12)


def test_rotate_vector_matches_matrix():
    rng = np.random.default_rng(3)
    for _ in range(100):
        q = rotation.random_uniform(rng)
        v = rng.normal(size=3)
        assert np.allclose(rotation.rotate_vector(q, v), rotation.to_matrix(q) @ v, atol=1e-12)


def test_rotation_preserves_length():
    rng = np.random.default_rng(4)
    for _ in range(100):
        q = rotation.random_uniform(rng)
        v = rng.normal(size=3)
        assert np.linalg.norm(rotation.rotate_vector(q, v)) == pytest.approx(
            np.linalg.norm(v), abs=1e-12
        )


def test_random_uniform_is_unit():
    rng = np.random.default_rng(5)
    qs = np.array([rotation.random_uniform(rng) for _ in range(1000)])
    assert np.allclose(np.linalg.norm(qs, axis=1), 1.0, atol=1e-12)


def test_integrate_angular_velocity_small_step():
    # omega about z for time dt rotates by omega*dt about z
    q = rotation.integrate_angular_velocity(rotation.IDENTITY, [0.0, 0.0, 2.0], 0.001)
    expected = rotation.from_axis_angle([0.0, 0.0, 1.0], 0.002)
    assert np.allclose(q, expected, atol=1e-9)


def test_integrate_zero_velocity_is_identity_map():
    rng = np.random.default_rng(6)
    q = rotation.random_uniform(rng)
    assert np.allclose(rotation.integrate_angular_velocity(q, [0.0, 0.0, 0.0], 0.01), q)
