"""2x2 matrix algebra realizing complex, Euclidean and split quaternions.

A quaternion of any of the three kinds is a ``(2, 2)`` numpy array (real or
complex).  Every function broadcasts over leading axes, so a stack of points
with shape ``(..., 2, 2)`` can be processed in one call.
"""

from __future__ import annotations

import numpy as np

from .errors import DomainError

DEFAULT_TOL = 1e-10

# Elementary matrices for the coordinates (x11, x12, x21, x22), in that order.
BASIS = np.zeros((4, 2, 2))
BASIS[0, 0, 0] = BASIS[1, 0, 1] = BASIS[2, 1, 0] = BASIS[3, 1, 1] = 1.0

I2 = np.eye(2)
J2 = np.array([[0.0, 1.0], [-1.0, 0.0]])


def from_coords(x) -> np.ndarray:
    """Point ``(x11, x12, x21, x22)`` -> matrix ``[[x11, x12], [x21, x22]]``."""
    x = np.asarray(x)
    return x.reshape(x.shape[:-1] + (2, 2))


def to_coords(X) -> np.ndarray:
    X = np.asarray(X)
    return X.reshape(X.shape[:-2] + (4,))


def transpose(Z):
    return np.swapaxes(np.asarray(Z), -1, -2)


def tilde(Z):
    """Adjugate: ``[[z22, -z12], [-z21, z11]]``, so ``Z @ tilde(Z) = det(Z) I``."""
    Z = np.asarray(Z)
    out = np.empty_like(Z)
    out[..., 0, 0] = Z[..., 1, 1]
    out[..., 0, 1] = -Z[..., 0, 1]
    out[..., 1, 0] = -Z[..., 1, 0]
    out[..., 1, 1] = Z[..., 0, 0]
    return out


def star(Z):
    """Conjugate transpose."""
    return np.conj(transpose(Z))


def det(Z):
    Z = np.asarray(Z)
    return Z[..., 0, 0] * Z[..., 1, 1] - Z[..., 0, 1] * Z[..., 1, 0]


def inv(Z):
    """Closed-form inverse ``tilde(Z) / det(Z)``; raises on singular input."""
    d = det(Z)
    if np.any(d == 0):
        raise DomainError("singular 2x2 matrix")
    return tilde(Z) / np.asarray(d)[..., None, None]


def _close(a, b, tol) -> bool:
    return bool(np.max(np.abs(np.asarray(a) - np.asarray(b)), initial=0.0) <= tol)


def is_euclidean(Z, tol: float = DEFAULT_TOL) -> bool:
    """True when ``Z`` is an ordinary quaternion, i.e. ``Z* = tilde(Z)``."""
    return _close(star(Z), tilde(Z), tol)


def is_split(Z, tol: float = DEFAULT_TOL) -> bool:
    """True when ``Z`` is a split quaternion (real entries), i.e. ``Z* = Z^t``."""
    return _close(star(Z), transpose(Z), tol)


def is_split_real(Z, tol: float = DEFAULT_TOL) -> bool:
    """A split quaternion equal to its own transpose."""
    return is_split(Z, tol) and _close(Z, transpose(Z), tol)


def _check_spd(M, tol):
    M = np.asarray(M, dtype=float)
    if M.shape[-2:] != (2, 2):
        raise DomainError(f"expected (..., 2, 2), got {M.shape}")
    scale = max(1.0, float(np.max(np.abs(M))))
    if not _close(M, transpose(M), tol * scale):
        raise DomainError("matrix is not symmetric")
    tr = M[..., 0, 0] + M[..., 1, 1]
    d = det(M)
    if np.any(d <= 0) or np.any(tr <= 0):
        raise DomainError("matrix is not positive definite")
    return M, tr, d


def spd_sqrt(M, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Symmetric positive-definite square root of a 2x2 SPD matrix.

    Uses ``sqrt(M) = (M + s I) / t`` with ``s = sqrt(det M)`` and
    ``t = sqrt(tr M + 2 s)``, which follows from Cayley-Hamilton and stays
    exact when the two eigenvalues coincide.
    """
    M, tr, d = _check_spd(M, tol)
    s = np.sqrt(d)
    t = np.sqrt(tr + 2.0 * s)
    return (M + s[..., None, None] * I2) / t[..., None, None]


def spd_inv_sqrt(M, tol: float = DEFAULT_TOL) -> np.ndarray:
    M, tr, d = _check_spd(M, tol)
    s = np.sqrt(d)
    t = np.sqrt(tr + 2.0 * s)
    # inverse of (M + sI)/t is t (tilde(M) + sI) / (s (tr + 2s))
    return (t / (s * (tr + 2.0 * s)))[..., None, None] * (tilde(M) + s[..., None, None] * I2)


def matrix_identity_check(a, b) -> float:
    """Max-norm of ``1 - a (a^t a + b^t b)^-1 a^t - (1 + a (b^t b)^-1 a^t)^-1``."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    try:
        lhs = I2 - a @ np.linalg.inv(a.T @ a + b.T @ b) @ a.T
        rhs = np.linalg.inv(I2 + a @ np.linalg.inv(b.T @ b) @ a.T)
    except np.linalg.LinAlgError as exc:
        raise DomainError("singular intermediate matrix") from exc
    return float(np.max(np.abs(lhs - rhs)))


def euclidean_matrix(x) -> np.ndarray:
    """Quaternion matrix of ``(x1, x2, x3, x4)``: ``[[x1+i x4, x2+i x3], [-x2+i x3, x1-i x4]]``."""
    x = np.asarray(x, dtype=float)
    x1, x2, x3, x4 = np.moveaxis(x, -1, 0)
    out = np.empty(x.shape[:-1] + (2, 2), dtype=complex)
    out[..., 0, 0] = x1 + 1j * x4
    out[..., 0, 1] = x2 + 1j * x3
    out[..., 1, 0] = -x2 + 1j * x3
    out[..., 1, 1] = x1 - 1j * x4
    return out


# d/dx_i of euclidean_matrix, i = 1..4
EUCLIDEAN_BASIS = np.stack([euclidean_matrix(e) for e in np.eye(4)])
