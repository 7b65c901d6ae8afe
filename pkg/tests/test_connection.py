from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from splitym import connection as conn
from splitym import forms, quat
from splitym import solutions as sol
from splitym.errors import DomainError

OMEGA = forms.basis_2form(0, 2) + forms.basis_2form(1, 3)


def test_flat_fields_have_zero_curvature():
    x = np.random.default_rng(0).normal(size=(5, 4))
    zero = conn.constant_field(np.zeros((4, 2, 2)))
    np.testing.assert_array_equal(conn.curvature_fd(zero, x), 0)
    C = np.zeros((4, 2, 2))
    C[0] = [[1.0, 2.0], [3.0, 4.0]]
    np.testing.assert_allclose(conn.curvature_fd(conn.constant_field(C), x), 0, atol=1e-12)
    assert conn.sdym_residual(np.zeros((6, 2, 2))) == 0
    assert conn.asdym_residual(np.zeros((6, 2, 2))) == 0


def test_instanton_curvature_at_origin():
    F = conn.curvature_fd(sol.basic_split_instanton(), np.zeros(4))
    np.testing.assert_allclose(F, OMEGA[:, None, None] * quat.J2, atol=1e-8)


def test_residuals_batch_and_scalar():
    rng = np.random.default_rng(1)
    F = sol.basic_split_instanton().F(rng.normal(size=(100, 4)))
    r = conn.sdym_residual(F)
    assert r.shape == (100,) and np.max(r) < 1e-8
    assert isinstance(conn.sdym_residual(F[0]), float)
    assert np.max(conn.asdym_residual(sol.basic_split_anti_instanton().F(rng.normal(size=(100, 4))))) < 1e-8


@given(arrays(np.float64, (6, 2, 2), elements=st.floats(-3, 3, allow_nan=False)))
def test_sd_and_asd_residuals_jointly_control_F(F):
    assert max(conn.sdym_residual(F), conn.asdym_residual(F)) >= np.max(np.abs(F)) - 1e-12


def test_richardson_stencil_is_high_order():
    A = sol.basic_split_instanton()
    x = np.array([0.3, -0.2, 0.5, 0.1])
    exact = A.F(x)
    errs = [np.max(np.abs(conn.curvature_fd(A, x, h) - exact)) for h in (0.08, 0.04)]
    assert errs[0] / errs[1] >= 8.0


def test_derivative_fd_matches_polynomial():
    f = lambda x: x[..., 0] ** 3 * x[..., 3] - x[..., 1] * x[..., 2] ** 2
    x = np.array([[0.5, -1.0, 2.0, 0.25], [1.0, 1.0, 1.0, 1.0]])
    d = conn.derivative_fd(f, x)
    expect = np.stack([3 * x[:, 0] ** 2 * x[:, 3], -x[:, 2] ** 2, -2 * x[:, 1] * x[:, 2], x[:, 0] ** 3], -1)
    np.testing.assert_allclose(d, expect, atol=1e-9)


def test_domain_is_enforced():
    A = conn.GaugeField(potential=lambda x: np.zeros(np.shape(x)[:-1] + (4, 1, 1)),
                        domain=lambda x: x[..., 0] > 0, name="half space")
    with pytest.raises(DomainError):
        A(np.array([-1.0, 0, 0, 0]))
    with pytest.raises(DomainError):
        conn.curvature_fd(A, np.array([1e-6, 0, 0, 0]))
    assert A(np.array([1.0, 0, 0, 0])).shape == (4, 1, 1)


def test_gauge_identity_leaves_field_unchanged():
    A = sol.basic_split_instanton()
    x = np.random.default_rng(2).normal(size=(20, 4))
    B = conn.gauge_apply(lambda y: np.broadcast_to(np.eye(2), y.shape[:-1] + (2, 2)), A)
    np.testing.assert_allclose(B.potential(x), A.potential(x), atol=1e-12)


def test_o2_gauge_gives_antisymmetric_potential():
    x = np.random.default_rng(3).normal(size=(100, 4))
    B = conn.gauge_apply(sol.o2_gauge, sol.basic_split_instanton())
    P = B.potential(x)
    assert np.max(np.abs(P + quat.transpose(P))) < 1e-8


def smooth_gauge(x):
    """A bounded, everywhere-invertible 2x2 gauge transformation."""
    x = np.asarray(x)
    t = np.sin(x[..., 0]) + x[..., 1] * x[..., 3] / (1 + x[..., 2] ** 2)
    c, s = np.cos(t), np.sin(t)
    rot = np.stack([np.stack([c, -s], -1), np.stack([s, c], -1)], -2)
    scale = np.exp(0.3 * np.tanh(x[..., 2]))[..., None, None]
    return scale * rot


def test_curvature_covariance():
    A = sol.basic_split_instanton()
    x = np.random.default_rng(4).normal(size=(30, 4))
    B = conn.gauge_apply(smooth_gauge, A)
    G = smooth_gauge(x)
    expect = np.linalg.inv(G)[:, None] @ A.F(x) @ G[:, None]
    # B carries the transformed closed form; the FD curvature of its potential is an independent check.
    np.testing.assert_allclose(B.F(x), expect, atol=1e-12)
    np.testing.assert_allclose(conn.curvature_fd(B, x), expect, atol=1e-6)


def test_transpose_swaps_instanton_and_anti_instanton():
    x = np.random.default_rng(5).normal(size=(50, 4))
    inst, anti = sol.basic_split_instanton(), sol.basic_split_anti_instanton()
    np.testing.assert_allclose(conn.transpose_point_field(inst).potential(x), anti.potential(x), atol=1e-13)
    np.testing.assert_allclose(conn.transpose_point_field(anti).potential(x), inst.potential(x), atol=1e-13)


def test_gauge_field_charge_density_uses_pairing():
    A = sol.basic_split_instanton()
    assert A.pairing() is forms.VOLUME_PAIRING
    dens = A.charge_density(np.zeros(4))
    F = A.F(np.zeros(4))
    assert dens == pytest.approx(float(forms.trace_wedge22(F, F)))
    assert sol.euclidean_basic_instanton().pairing() is forms.CANONICAL_PAIRING
