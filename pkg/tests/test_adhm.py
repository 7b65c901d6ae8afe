from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from splitym import adhm, forms, quat
from splitym import connection as conn
from splitym import solutions as sol
from splitym.errors import DegenerateDataError, DomainError

seeds = st.integers(0, 2**32 - 1)
UNIVERSAL = adhm.universal_datum()


def pts(seed, n=20, spread=1.0):
    return spread * np.random.default_rng(seed).normal(size=(n, 4))


def test_validation():
    with pytest.raises(DomainError):
        adhm.ADHMSystem(1, 1, np.zeros((2, 2)), np.zeros((2, 2)))
    with pytest.raises(DomainError):
        adhm.ADHMSystem(0, 1, np.zeros((2, 2)), np.zeros((2, 2)))
    assert adhm.ComplexADHMSystem(1, 1, np.zeros((4, 2)), np.zeros((4, 2))).is_complex
    assert not UNIVERSAL.is_complex and UNIVERSAL.size == 4


def test_universal_nondegenerate():
    scan = adhm.nondegeneracy_scan(UNIVERSAL, 512)
    assert scan.passed and scan.value > 1e-3


def test_degenerate_data_fail():
    zero = adhm.ADHMSystem(1, 1, np.zeros((4, 2)), np.zeros((4, 2)))
    scan = adhm.nondegeneracy_scan(zero, 256)
    assert not scan.passed and scan.value == 0.0
    A = np.vstack([np.eye(2), np.zeros((2, 2))])
    same = adhm.ADHMSystem(1, 1, A, A)
    scan = adhm.nondegeneracy_scan(same, 512)
    assert not scan.passed
    # the witness really is a point where the pencil drops rank
    w = scan.witness
    assert np.linalg.svd(same.pencil(w[:2], w[2:]), compute_uv=False)[-1] < 1e-8
    # explicit kernel: [X : Y] = [I : -I]
    assert np.allclose(same.pencil(np.eye(2), -np.eye(2)), 0)


def test_projective_samples_are_orthonormal():
    q = adhm.projective_samples(64, 3)
    assert q.shape == (64, 4, 2)
    np.testing.assert_allclose(quat.transpose(q) @ q, np.broadcast_to(np.eye(2), (64, 2, 2)), atol=1e-12)


def test_split_reality():
    scan = adhm.split_reality_scan(UNIVERSAL, 256)
    assert scan.passed and scan.value < 1e-15
    rng = np.random.default_rng(0)
    for n in (1, 2):
        assert adhm.split_reality_scan(adhm.random_system(rng, n, 1), 128).passed
    scan = adhm.split_reality_scan(adhm.random_system(rng, 1, 2), 128)
    assert not scan.passed and scan.value > 1e-3


def test_degenerate_point_raises():
    zero = adhm.ADHMSystem(1, 1, np.zeros((4, 2)), np.zeros((4, 2)))
    with pytest.raises(DegenerateDataError):
        adhm.split_reality_residual(zero, np.zeros(4))
    assert adhm.split_reality_residual_or_inf(zero, np.zeros(4)) == np.inf


def test_cokernel_frame():
    f = adhm.cokernel_frame(UNIVERSAL, np.zeros((2, 2)))
    np.testing.assert_allclose(f.u @ f.u.T, np.diag([1.0, 1.0, 0.0, 0.0]), atol=1e-14)
    rng = np.random.default_rng(1)
    s = adhm.random_system(rng, 2, 1)
    X = quat.from_coords(pts(2, 100))
    f = s and adhm.cokernel_frame(s, X)
    assert np.max(np.abs(quat.transpose(f.u) @ f.v)) < 1e-12
    np.testing.assert_allclose(quat.transpose(f.u) @ f.u, np.broadcast_to(np.eye(4), (100, 4, 4)), atol=1e-12)


def test_universal_frame_reproduces_instanton():
    """With ``u = [I; -X^t]`` the projected connection is the basic split instanton."""
    x = pts(3, 50)
    X = quat.from_coords(x)
    u = np.concatenate([np.broadcast_to(np.eye(2), X.shape), -quat.transpose(X)], axis=-2)
    assert np.max(np.abs(quat.transpose(u) @ UNIVERSAL.v(X))) < 1e-14
    du = np.stack([np.concatenate([np.zeros((2, 2)), -quat.BASIS[m].T]) for m in range(4)])
    A = np.linalg.inv(quat.transpose(u) @ u)[:, None] @ quat.transpose(u)[:, None] @ du
    np.testing.assert_allclose(A, sol.basic_split_instanton().potential(x), atol=1e-13)
    F = adhm.induced_curvature(UNIVERSAL, X, u)
    np.testing.assert_allclose(F, sol.basic_split_instanton().F(x), atol=1e-12)


def test_induced_curvature_at_origin_is_instanton():
    F = adhm.induced_curvature(UNIVERSAL, np.zeros((2, 2)))
    np.testing.assert_allclose(F, sol.basic_split_instanton().F(np.zeros(4)), atol=1e-14)


def test_universal_sd_and_gauge_invariants():
    x = pts(4, 100)
    F = adhm.induced_curvature(UNIVERSAL, quat.from_coords(x))
    assert np.max(conn.sdym_residual(F)) < 1e-9
    Fi = sol.basic_split_instanton().F(x)
    np.testing.assert_allclose(forms.det2form(F), forms.det2form(Fi), atol=1e-12)
    np.testing.assert_allclose(adhm.charge_density(UNIVERSAL, x), forms.trace_wedge22(Fi, Fi), atol=1e-12)


@pytest.mark.parametrize("n, k", [(1, 1), (2, 1), (1, 2)])
def test_closed_curvature_matches_fd(n, k):
    s = adhm.random_system(np.random.default_rng(5), n, k)
    A = adhm.induced_field(s)
    x = pts(6, 30, 0.5)
    assert np.max(np.abs(conn.curvature_fd(A, x) - A.F(x))) < 1e-7
    F = A.F(x)
    np.testing.assert_allclose(forms.trace_wedge22(F, F), A.charge_density(x), atol=1e-10)


def test_frame_independence():
    rng = np.random.default_rng(7)
    s = adhm.random_system(rng, 1, 1)
    x = pts(8, 30, 0.5)
    X = quat.from_coords(x)
    F1 = adhm.induced_curvature(s, X)
    U1 = adhm.reference_complement(s, np.array([0.2, -0.1, 0.3, 0.1]))
    F2 = adhm.induced_curvature(s, X, adhm.cokernel_frame(s, X, U1).u)
    np.testing.assert_allclose(forms.det2form(F1), forms.det2form(F2), atol=1e-9)
    np.testing.assert_allclose(forms.trace_wedge22(F1, F1), forms.trace_wedge22(F2, F2), atol=1e-9)


def invariants(s, x):
    F = adhm.induced_curvature(s, quat.from_coords(x))
    return forms.trace_wedge22(F, F), adhm.split_reality_residual(s, x)


@given(seeds)
@settings(max_examples=15, deadline=None)
def test_left_orthogonal_action(seed):
    rng = np.random.default_rng(seed)
    s = adhm.random_system(rng, 2, 1)
    O, _ = np.linalg.qr(rng.normal(size=(s.size, s.size)))
    t = adhm.ADHMSystem(s.n, s.k, O @ s.A, O @ s.B)
    x = pts(seed % 1000, 10, 0.5)
    for a, b in zip(invariants(s, x), invariants(t, x)):
        np.testing.assert_allclose(a, b, atol=1e-9)


@given(seeds)
@settings(max_examples=15, deadline=None)
def test_right_block_scalar_action(seed):
    """Right multiplication by ``m (x) I_2`` commutes with ``I_k (x) X`` and keeps ``col v``."""
    rng = np.random.default_rng(seed)
    s = adhm.random_system(rng, 1, 2)
    m = rng.normal(size=(2, 2)) + 2 * np.eye(2)
    r = np.kron(m, np.eye(2))
    t = adhm.ADHMSystem(s.n, s.k, s.A @ r, s.B @ r)
    x = pts(seed % 1000, 10, 0.5)
    a = adhm.induced_curvature(s, quat.from_coords(x))
    b = adhm.induced_curvature(t, quat.from_coords(x))
    np.testing.assert_allclose(forms.trace_wedge22(a, a), forms.trace_wedge22(b, b), atol=1e-9)
    np.testing.assert_allclose(forms.det2form(a), forms.det2form(b), atol=1e-9)


def test_sd_iff_split_real():
    rep = adhm.sd_iff_split_real_check(UNIVERSAL, 64)
    assert np.max(rep["sd_residual"]) < 1e-9 and np.max(rep["split_residual"]) < 1e-9
    both = adhm.direct_sum(UNIVERSAL, UNIVERSAL)
    assert (both.n, both.k) == (2, 2)
    rep = adhm.sd_iff_split_real_check(both, 64)
    assert np.max(rep["sd_residual"]) < 1e-9 and np.max(rep["split_residual"]) < 1e-9
    rng = np.random.default_rng(9)
    rep = adhm.sd_iff_split_real_check(adhm.random_system(rng, 1, 2), 64)
    assert np.min(rep["sd_residual"]) > 1e-4 and np.min(rep["split_residual"]) > 1e-4


def test_direct_sum_of_universal_is_universal_n2():
    two = adhm.universal_datum(2)
    ds = adhm.direct_sum(UNIVERSAL, UNIVERSAL)
    x = pts(10, 10)
    np.testing.assert_allclose(invariants(two, x)[0], invariants(ds, x)[0], atol=1e-12)


def test_complex_type_11():
    assert adhm.complex_adhm_type11_check(adhm.universal_datum(complex_=True)) < 1e-9
    rng = np.random.default_rng(11)
    assert adhm.complex_adhm_type11_check(adhm.random_system(rng, 1, 1, complex_=True)) < 1e-7


def test_complex_universal_matches_unified_curvature():
    cu = adhm.universal_datum(complex_=True)
    z = 0.4 * (np.random.default_rng(12).normal(size=4) + 1j * np.random.default_rng(13).normal(size=4))
    F8 = conn.curvature_fd(adhm.complex_induced_field(cu), np.concatenate([z.real, z.imag]))
    f20, f02 = adhm.holomorphic_parts(F8)
    assert max(np.max(np.abs(f20)), np.max(np.abs(f02))) < 1e-9
    with pytest.raises(DomainError):
        adhm.induced_field(cu)


def test_file_round_trip(tmp_path):
    s = adhm.random_system(np.random.default_rng(14), 2, 1)
    p = tmp_path / "data.txt"
    adhm.save_system(s, p)
    t = adhm.load_system(p)
    assert (t.n, t.k) == (2, 1)
    np.testing.assert_array_equal(t.A, s.A)
    np.testing.assert_array_equal(t.B, s.B)


def test_file_parsing(tmp_path):
    p = tmp_path / "u.txt"
    p.write_text("# comment\n1 1\n1 0\n0 1  # trailing\n0 0\n0 0\n\n0 0\n0 0\n1 0\n0 1\n")
    s = adhm.load_system(p)
    np.testing.assert_array_equal(s.A, UNIVERSAL.A)
    np.testing.assert_array_equal(s.B, UNIVERSAL.B)
    for bad in ("", "1\n", "1 1\n1 2 3\n", "1 1\n" + "x y\n" * 8):
        p.write_text(bad)
        with pytest.raises(ValueError):
            adhm.load_system(p)
