from __future__ import annotations

import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from splitym import forms, quat
from splitym.forms import basis_2form as e

coeffs6 = arrays(np.float64, (6,), elements=st.floats(-5, 5, allow_nan=False))


def tensor(w):
    """Scalar 2-form as an antisymmetric 4x4 array (independent representation)."""
    T = np.zeros((4, 4))
    for n, (k, l) in enumerate(forms.PAIRS):
        T[k, l], T[l, k] = w[n], -w[n]
    return T


def test_hodge_on_generators():
    np.testing.assert_array_equal(forms.hodge_star(e(0, 2)), e(0, 2))
    np.testing.assert_array_equal(forms.hodge_star(e(0, 1)), -e(0, 1))
    for w in forms.SD_BASIS:
        assert forms.is_sd(w)
    for w in forms.ASD_BASIS:
        assert forms.is_asd(w)
    for k in range(6):
        np.testing.assert_array_equal(forms.hodge_star(forms.hodge_star(np.eye(6)[k])), np.eye(6)[k])


def test_hodge_self_adjoint_for_wedge_pairing():
    for a, b in itertools.product(np.eye(6), repeat=2):
        assert forms.wedge22_scalar(a, forms.hodge_star(b)) == forms.wedge22_scalar(b, forms.hodge_star(a))


def test_projections():
    np.testing.assert_array_equal(forms.sd_part(e(0, 3)), (e(0, 3) + e(1, 2)) / 2)
    np.testing.assert_array_equal(forms.asd_part(e(1, 3)), np.zeros(6))
    np.testing.assert_array_equal(forms.sd_part(np.zeros(6)), np.zeros(6))


@given(coeffs6)
def test_projectors_are_complementary(w):
    sd, asd = forms.sd_part(w), forms.asd_part(w)
    np.testing.assert_allclose(forms.sd_part(sd), sd, atol=1e-14)
    np.testing.assert_allclose(forms.sd_part(asd), 0, atol=1e-14)
    np.testing.assert_allclose(sd + asd, w, atol=1e-14)


def test_volume_pairing_orientation():
    # dV = dx11 ^ dx21 ^ dx12 ^ dx22
    assert forms.wedge22_scalar(e(0, 2), e(1, 3)) == 1.0
    assert forms.wedge22_scalar(e(0, 1), e(2, 3)) == -1.0
    assert forms.wedge22_scalar(e(0, 1), e(2, 3), forms.CANONICAL_PAIRING) == 1.0
    np.testing.assert_array_equal(forms.VOLUME_PAIRING, forms.VOLUME_PAIRING.T)


def test_wedge11_examples():
    W = forms.wedge11(forms.DX, forms.DX)
    np.testing.assert_array_equal(W[:, 0, 0], e(1, 2))
    np.testing.assert_array_equal(W[:, 0, 1], e(0, 1) + e(1, 3))
    np.testing.assert_array_equal(W[:, 1, 0], e(2, 0) + e(3, 2))
    np.testing.assert_array_equal(W[:, 1, 1], e(2, 1))
    W = forms.wedge11(forms.DX, forms.DXT)
    np.testing.assert_array_equal(W[:, 0, 0], 0)
    np.testing.assert_array_equal(W[:, 0, 1], e(0, 2) + e(1, 3))
    np.testing.assert_array_equal(W[:, 1, 0], -W[:, 0, 1])
    np.testing.assert_array_equal(W[:, 1, 1], 0)
    np.testing.assert_array_equal(forms.wedge11(np.zeros((4, 2, 2)), forms.DX), 0)


def test_wedge11_matches_brute_force_expansion():
    rng = np.random.default_rng(0)
    a, b = rng.normal(size=(4, 2, 3)), rng.normal(size=(4, 3, 2))
    W = forms.wedge11(a, b)
    for i, j in itertools.product(range(2), repeat=2):
        T = sum(np.outer(a[:, i, m], b[:, m, j]) - np.outer(b[:, m, j], a[:, i, m]) for m in range(3))
        np.testing.assert_allclose(tensor(W[:, i, j]), T, atol=1e-13)


def test_wedge11_bilinear():
    rng = np.random.default_rng(1)
    a1, a2, b = rng.normal(size=(3, 4, 2, 2))
    np.testing.assert_allclose(forms.wedge11(2 * a1 + a2, b), 2 * forms.wedge11(a1, b) + forms.wedge11(a2, b), atol=1e-13)


def test_trace_and_det_of_off_diagonal_form():
    w = np.array([0.3, -1.0, 0.5, 2.0, 0.7, -0.2])
    F = np.zeros((6, 2, 2))
    F[:, 0, 1], F[:, 1, 0] = w, -w
    ww = forms.wedge22_scalar(w, w)
    assert forms.trace_wedge22(F, F) == pytest.approx(-2 * ww)
    assert forms.det2form(F) == pytest.approx(ww)
    assert forms.trace_wedge22(np.zeros((6, 2, 2)), F) == 0


def test_det_of_basic_instanton_curvature_at_origin():
    omega = e(0, 2) + e(1, 3)
    F = omega[:, None, None] * quat.J2
    assert forms.det2form(F) == 2.0


def test_lemma_examples():
    assert forms.duality_predicate("a", np.eye(2))
    assert not forms.duality_predicate("a", quat.J2)
    assert forms.duality_predicate("c", 3 * np.eye(2))
    assert not forms.duality_predicate("c", np.diag([1.0, 2.0]))
    with pytest.raises(ValueError):
        forms.duality_predicate("e", np.eye(2))


def lemma_samples(rng, n):
    """Random matrices, a third made symmetric and a third made scalar."""
    out = []
    for k in range(n):
        A = rng.normal(size=(2, 2))
        if k % 3 == 1:
            A = A + A.T
        elif k % 3 == 2:
            A = A[0, 0] * np.eye(2)
        out.append(A)
    return out


@pytest.mark.parametrize("variant", "abcd")
def test_lemma_predicate_matches_criterion(variant):
    rng = np.random.default_rng(2)
    for A in lemma_samples(rng, 1000):
        assert forms.duality_predicate(variant, A) == forms.duality_criterion(variant, A)


def test_euclidean_volume_factor():
    assert forms.euclidean_volume_factor() == pytest.approx(-4)
