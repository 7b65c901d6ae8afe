from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from splitym import quat
from splitym.errors import DomainError

finite = st.floats(-10, 10, allow_nan=False)
mat2 = arrays(np.float64, (2, 2), elements=finite)


def rand_complex(rng, size=()):
    return rng.normal(size=size + (2, 2)) + 1j * rng.normal(size=size + (2, 2))


def quaternion_samples(rng, n):
    a, b = rng.normal(size=(2, n)) + 1j * rng.normal(size=(2, n))
    Z = np.empty((n, 2, 2), dtype=complex)
    Z[:, 0, 0], Z[:, 0, 1] = a, -np.conj(b)
    Z[:, 1, 0], Z[:, 1, 1] = b, np.conj(a)
    return Z


def test_definitions_on_small_examples():
    Z = np.array([[1.0, 2.0], [3.0, 4.0]])
    np.testing.assert_array_equal(quat.transpose(Z), [[1, 3], [2, 4]])
    np.testing.assert_array_equal(quat.tilde(Z), [[4, -2], [-3, 1]])
    for f in (quat.transpose, quat.tilde, quat.star):
        np.testing.assert_array_equal(f(np.eye(2)), np.eye(2))
    np.testing.assert_array_equal(quat.star(np.diag([1j, -1j])), np.diag([-1j, 1j]))


def test_coordinate_round_trip():
    x = np.arange(8.0).reshape(2, 4)
    X = quat.from_coords(x)
    assert X[1, 1, 0] == 6.0
    np.testing.assert_array_equal(quat.to_coords(X), x)


def test_products_against_direct_multiplication():
    rng = np.random.default_rng(1)
    Z, W = rng.normal(size=(2, 100, 2, 2))
    np.testing.assert_allclose(quat.transpose(Z @ W), quat.transpose(W) @ quat.transpose(Z), atol=1e-13)
    np.testing.assert_allclose(Z @ quat.tilde(Z), quat.det(Z)[:, None, None] * np.eye(2), atol=1e-13)
    np.testing.assert_allclose(quat.det(Z @ W), quat.det(Z) * quat.det(W), atol=1e-12)


@given(mat2)
def test_involutions_and_commuting(Z):
    for f in (quat.transpose, quat.tilde, quat.star):
        np.testing.assert_array_equal(f(f(Z)), Z)
    np.testing.assert_array_equal(quat.tilde(quat.transpose(Z)), quat.transpose(quat.tilde(Z)))
    assert quat.det(quat.tilde(Z)) == quat.det(Z)
    assert quat.det(quat.transpose(Z)) == quat.det(Z)


def test_star_is_tilde_on_quaternions_and_transpose_on_reals():
    rng = np.random.default_rng(2)
    Zq = quaternion_samples(rng, 50)
    np.testing.assert_array_equal(quat.star(Zq), quat.tilde(Zq))
    assert all(quat.is_euclidean(z) for z in Zq)
    Zr = rng.normal(size=(50, 2, 2))
    np.testing.assert_array_equal(quat.star(Zr), quat.transpose(Zr))
    # generic complex matrices are neither
    Zc = rand_complex(rng, (50,))
    assert not any(quat.is_euclidean(z) for z in Zc)


def test_euclidean_matrix_is_a_quaternion():
    rng = np.random.default_rng(3)
    for x in rng.normal(size=(20, 4)):
        Z = quat.euclidean_matrix(x)
        assert quat.is_euclidean(Z)
        assert quat.det(Z).real == pytest.approx(x @ x)


def test_split_predicates():
    assert quat.is_split_real(np.eye(2))
    assert not quat.is_split_real(quat.J2)
    assert quat.is_split(quat.J2)
    rng = np.random.default_rng(4)
    for Z in rng.normal(size=(20, 2, 2)):
        assert quat.is_split(Z.astype(complex))
    for Z in rand_complex(rng, (20,)):
        assert quat.is_split(Z) == bool(np.all(Z.imag == 0))
    assert quat.is_split(np.array([[1, 1e-12j], [0, 1]]))
    assert not quat.is_split(np.array([[1, 1e-12j], [0, 1]]), tol=1e-14)


def test_spd_sqrt():
    np.testing.assert_array_equal(quat.spd_sqrt(np.eye(2)), np.eye(2))
    np.testing.assert_allclose(quat.spd_sqrt(np.diag([4.0, 9.0])), np.diag([2.0, 3.0]), atol=1e-15)
    rng = np.random.default_rng(5)
    B = rng.normal(size=(100, 2, 2))
    M = B @ quat.transpose(B) + 0.1 * np.eye(2)
    S = quat.spd_sqrt(M)
    assert np.max(np.abs(S @ S - M)) < 1e-12
    np.testing.assert_allclose(S, quat.transpose(S), atol=1e-14)
    np.testing.assert_allclose(quat.spd_inv_sqrt(M) @ S, np.broadcast_to(np.eye(2), M.shape), atol=1e-12)


@given(st.floats(0, 2 * np.pi), st.floats(0.1, 10), st.floats(0.1, 10), st.floats(0, 2 * np.pi))
@settings(max_examples=50)
def test_spd_sqrt_rotation_covariant(t, l1, l2, s):
    def rot(a):
        return np.array([[np.cos(a), -np.sin(a)], [np.sin(a), np.cos(a)]])

    M = rot(s) @ np.diag([l1, l2]) @ rot(s).T
    R = rot(t)
    np.testing.assert_allclose(quat.spd_sqrt(R @ M @ R.T), R @ quat.spd_sqrt(M) @ R.T, atol=1e-12)


def test_spd_rejects_bad_input():
    with pytest.raises(DomainError):
        quat.spd_sqrt(quat.J2)
    with pytest.raises(DomainError):
        quat.spd_sqrt(-np.eye(2))
    with pytest.raises(DomainError):
        quat.inv(np.zeros((2, 2)))


def test_matrix_identity():
    assert quat.matrix_identity_check(np.zeros((2, 2)), np.eye(2)) == 0.0
    assert quat.matrix_identity_check(np.eye(2), np.eye(2)) < 1e-15
    rng = np.random.default_rng(6)
    worst = 0.0
    for _ in range(1000):
        a, b = rng.normal(size=(2, 2, 2))
        if abs(np.linalg.det(b)) < 0.1:
            continue
        worst = max(worst, quat.matrix_identity_check(a, b))
    assert worst < 1e-12
