"""Exterior algebra on the four coordinates (x11, x12, x21, x22).

Conventions
-----------
* Coordinates are indexed 0..3 in the order x11, x12, x21, x22.
* A scalar 2-form is a length-6 coefficient vector on the ordered basis
  ``dx_k ^ dx_l`` for ``(k, l)`` in :data:`PAIRS`.
* A matrix of 1-forms has shape ``(..., 4, r, s)``: entry ``[k]`` is the
  coefficient matrix of ``dx_k``.  A matrix of 2-forms has shape
  ``(..., 6, r, s)``.
* 4-forms are reported as a single coefficient of the volume form
  ``dV = dx11 ^ dx21 ^ dx12 ^ dx22``.  Note the order: this is *minus* the
  canonical monomial ``dx11 ^ dx12 ^ dx21 ^ dx22``.

Self-dual 2-forms are spanned by ``dx11^dx21``, ``dx12^dx22`` and
``dx11^dx22 + dx12^dx21``; anti-self-dual ones by ``dx11^dx12``,
``dx21^dx22`` and ``dx11^dx22 - dx12^dx21``.
"""

from __future__ import annotations

import itertools

import numpy as np

from . import quat

COORDS = ("x11", "x12", "x21", "x22")
PAIRS = tuple(itertools.combinations(range(4), 2))
PAIR_INDEX = {p: n for n, p in enumerate(PAIRS)}
I01, I02, I03, I12, I13, I23 = range(6)


def pair_name(n: int) -> str:
    k, l = PAIRS[n]
    return f"d{COORDS[k]}^d{COORDS[l]}"


def basis_2form(k: int, l: int) -> np.ndarray:
    """Scalar 2-form ``dx_k ^ dx_l`` with sign normalized to ``k < l``."""
    out = np.zeros(6)
    if k != l:
        sign = 1.0 if k < l else -1.0
        out[PAIR_INDEX[(min(k, l), max(k, l))]] = sign
    return out


def _canonical_volume_sign() -> np.ndarray:
    # W[a, b]: coefficient of dx0^dx1^dx2^dx3 in e_a ^ e_b
    W = np.zeros((6, 6))
    for a, (i, j) in enumerate(PAIRS):
        for b, (k, l) in enumerate(PAIRS):
            perm = (i, j, k, l)
            if len(set(perm)) < 4:
                continue
            inversions = sum(perm[m] > perm[n] for m in range(4) for n in range(m + 1, 4))
            W[a, b] = -1.0 if inversions % 2 else 1.0
    return W


# Coefficient of dV (not of the canonical monomial) in e_a ^ e_b.
VOLUME_PAIRING = -_canonical_volume_sign()
# Same pairing for Euclidean coordinates oriented by dx1^dx2^dx3^dx4.
CANONICAL_PAIRING = _canonical_volume_sign()

HODGE = np.zeros((6, 6))
HODGE[I01, I01] = -1.0
HODGE[I23, I23] = -1.0
HODGE[I02, I02] = 1.0
HODGE[I13, I13] = 1.0
HODGE[I12, I03] = 1.0  # *(dx11^dx22) = dx12^dx21
HODGE[I03, I12] = 1.0

SD_BASIS = np.array([basis_2form(0, 2), basis_2form(1, 3), basis_2form(0, 3) + basis_2form(1, 2)])
ASD_BASIS = np.array([basis_2form(0, 1), basis_2form(2, 3), basis_2form(0, 3) - basis_2form(1, 2)])

# 1-form matrices dX, dX^t and d(tilde X)
DX = quat.BASIS.copy()
DXT = quat.transpose(quat.BASIS)
DX_TILDE = quat.tilde(quat.BASIS)


def hodge_star(w) -> np.ndarray:
    """Hodge star on scalar ``(..., 6)`` or matrix ``(..., 6, r, s)`` 2-forms."""
    w = np.asarray(w)
    if w.ndim >= 3 and w.shape[-3] == 6:
        return np.einsum("ab,...bij->...aij", HODGE, w)
    return np.einsum("ab,...b->...a", HODGE, w)


def sd_part(w) -> np.ndarray:
    return 0.5 * (np.asarray(w) + hodge_star(w))


def asd_part(w) -> np.ndarray:
    return 0.5 * (np.asarray(w) - hodge_star(w))


def wedge22_scalar(a, b, pairing=VOLUME_PAIRING):
    """Volume coefficient of ``a ^ b`` for scalar 2-forms."""
    return np.einsum("...a,ab,...b->...", np.asarray(a), pairing, np.asarray(b))


def wedge11(alpha, beta) -> np.ndarray:
    """Matrix wedge of two matrix-valued 1-forms.

    ``(alpha ^ beta)_ij = sum_m alpha_im ^ beta_mj``; on the pair basis this is
    ``alpha_k @ beta_l - alpha_l @ beta_k`` for ``k < l``.  Both inputs have a
    component axis at position -3 of length 4 (or any common length n, giving
    ``n (n - 1) / 2`` pairs).
    """
    alpha = np.asarray(alpha)
    beta = np.asarray(beta)
    n = alpha.shape[-3]
    ks, ls = np.triu_indices(n, 1)
    return alpha[..., ks, :, :] @ beta[..., ls, :, :] - alpha[..., ls, :, :] @ beta[..., ks, :, :]


def trace_wedge22(F, G, pairing=VOLUME_PAIRING):
    """Volume coefficient of ``tr(F ^ G)`` for matrix 2-forms."""
    FG = np.einsum("...aij,...bji->...ab", np.asarray(F), np.asarray(G))
    return np.einsum("...ab,ab->...", FG, pairing)


def det2form(F, pairing=VOLUME_PAIRING):
    """Volume coefficient of ``F11 ^ F22 - F12 ^ F21`` for a 2x2 matrix 2-form."""
    F = np.asarray(F)
    return wedge22_scalar(F[..., 0, 0], F[..., 1, 1], pairing) - wedge22_scalar(
        F[..., 0, 1], F[..., 1, 0], pairing
    )


def left(M, alpha):
    """Left-multiply every component of a matrix form by the matrix ``M``."""
    return np.asarray(M)[..., None, :, :] @ np.asarray(alpha)


def right(alpha, M):
    return np.asarray(alpha) @ np.asarray(M)[..., None, :, :]


def is_sd(w, tol: float = 1e-10) -> bool:
    return bool(np.max(np.abs(asd_part(w)), initial=0.0) <= tol)


def is_asd(w, tol: float = 1e-10) -> bool:
    return bool(np.max(np.abs(sd_part(w)), initial=0.0) <= tol)


_LEMMA_FORMS = {
    # variant: (builder, duality the form is claimed to have)
    "a": (lambda A: wedge11(DX, A @ DXT), "sd"),
    "b": (lambda A: wedge11(DXT, A @ DX), "asd"),
    "c": (lambda A: wedge11(DX, A @ DX_TILDE), "asd"),
    "d": (lambda A: wedge11(DX_TILDE, A @ DX), "sd"),
}


def lemma_form(variant: str, A) -> np.ndarray:
    """The matrix 2-form of the requested variant built from ``A``."""
    builder, _ = _LEMMA_FORMS[variant]
    return builder(np.asarray(A))


def duality_predicate(variant: str, A, tol: float = 1e-10) -> bool:
    """Whether the variant's matrix 2-form has its claimed duality.

    Variants: ``a``: ``dZ ^ A dZ^t`` is SD; ``b``: ``dZ^t ^ A dZ`` is ASD;
    ``c``: ``dZ ^ A d(tilde Z)`` is ASD; ``d``: ``d(tilde Z) ^ A dZ`` is SD.
    The answer is read off the projected form, not from ``A`` directly.
    """
    if variant not in _LEMMA_FORMS:
        raise ValueError(f"unknown variant {variant!r}")
    builder, kind = _LEMMA_FORMS[variant]
    form = builder(np.asarray(A))
    scale = max(1.0, float(np.max(np.abs(A))))
    return is_sd(form, tol * scale) if kind == "sd" else is_asd(form, tol * scale)


def duality_criterion(variant: str, A, tol: float = 1e-10) -> bool:
    """The algebraic side: symmetric ``A`` for a/b, scalar ``A`` for c/d."""
    A = np.asarray(A)
    scale = max(1.0, float(np.max(np.abs(A))))
    if variant in ("a", "b"):
        return bool(np.max(np.abs(A - A.T)) <= tol * scale)
    if variant in ("c", "d"):
        off = max(abs(A[0, 1]), abs(A[1, 0]), abs(A[0, 0] - A[1, 1]))
        return bool(off <= tol * scale)
    raise ValueError(f"unknown variant {variant!r}")


def euclidean_volume_factor() -> complex:
    """Coefficient ``c`` in ``dV = c dx1^dx2^dx3^dx4`` under the quaternion identification.

    ``dV = dz11 ^ dz21 ^ dz12 ^ dz22``, so ``c`` is the determinant of the
    Jacobian of ``(z11, z21, z12, z22)`` with respect to ``(x1, .., x4)``.
    """
    cols = quat.EUCLIDEAN_BASIS  # d Z / d x_i
    jac = np.array([[cols[i][r, c] for i in range(4)] for r, c in ((0, 0), (1, 0), (0, 1), (1, 1))])
    return complex(np.linalg.det(jac))
