"""Closed-form (anti-)self-dual solutions and the conformal SL(4, R) action on them."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import forms, quat
from .connection import GaugeField
from .errors import DomainError

E = quat.BASIS
ET = quat.transpose(quat.BASIS)
I4 = np.eye(4)


def _left(M, comps):
    return np.asarray(M)[..., None, :, :] @ comps


def _two_sided(L, K, R, comps_left, comps_right):
    """``L (dZ_left ^ K dZ_right)`` style products on the pair basis.

    Returns ``L @ (cl_k @ K @ cr_l - cl_l @ K @ cr_k)`` for ``k < l``.
    """
    ks, ls = np.triu_indices(4, 1)
    K = np.asarray(K)[..., None, :, :]
    out = comps_left[ks] @ K @ comps_right[ls] - comps_left[ls] @ K @ comps_right[ks]
    return np.asarray(L)[..., None, :, :] @ out @ np.asarray(R)[..., None, :, :]


def _PQ(x):
    X = quat.from_coords(np.asarray(x, dtype=float))
    P = np.linalg.inv(quat.I2 + X @ quat.transpose(X))
    Q = np.linalg.inv(quat.I2 + quat.transpose(X) @ X)
    return X, P, Q


def basic_split_instanton() -> GaugeField:
    """``A = (1 + X X^t)^-1 X dX^t``, self-dual, charge 1."""

    def potential(x):
        X, P, _ = _PQ(x)
        return _left(P @ X, ET)

    def curvature(x):
        _, P, Q = _PQ(x)
        return _two_sided(P, Q, quat.I2, E, ET)

    return GaugeField(potential, curvature, name="basic split instanton")


def basic_split_anti_instanton() -> GaugeField:
    """``A = (1 + X^t X)^-1 X^t dX``, anti-self-dual, charge -1."""

    def potential(x):
        X, _, Q = _PQ(x)
        return _left(Q @ quat.transpose(X), E)

    def curvature(x):
        _, P, Q = _PQ(x)
        return _two_sided(Q, P, quat.I2, ET, E)

    return GaugeField(potential, curvature, name="basic split anti-instanton")


def o2_gauge(x) -> np.ndarray:
    """``(1 + X X^t)^(-1/2)``, which makes the basic instanton ``o(2)``-valued."""
    X = quat.from_coords(np.asarray(x, dtype=float))
    return quat.spd_inv_sqrt(quat.I2 + X @ quat.transpose(X))


def euclidean_basic_instanton() -> GaugeField:
    """``A = (1 + |x|^2)^-1 xbar dx`` in the coordinates x1..x4.

    The quaternion ``x`` is the complex matrix of :func:`quat.euclidean_matrix`,
    so ``xbar = x^* = tilde(x)``.
    """
    eb = quat.EUCLIDEAN_BASIS
    eb_bar = quat.star(eb)

    def potential(x):
        x = np.asarray(x, dtype=float)
        Xbar = quat.star(quat.euclidean_matrix(x))
        w = 1.0 / (1.0 + np.sum(x * x, axis=-1))
        return _left(w[..., None, None] * Xbar, eb)

    def curvature(x):
        x = np.asarray(x, dtype=float)
        w = 1.0 / (1.0 + np.sum(x * x, axis=-1)) ** 2
        ks, ls = np.triu_indices(4, 1)
        F = eb_bar[ks] @ eb[ls] - eb_bar[ls] @ eb[ks]
        return w[..., None, None, None] * F

    return GaugeField(potential, curvature, signature="euclidean", name="euclidean basic instanton")


def unified_potential(z) -> np.ndarray:
    """``(1 + Z^* Z)^-1 Z^* dZ`` at complex points ``z`` of shape ``(..., 4)``.

    Components are the coefficients of ``dz11, dz12, dz21, dz22``.
    """
    Z = quat.from_coords(np.asarray(z, dtype=complex))
    Zs = quat.star(Z)
    return _left(np.linalg.inv(quat.I2 + Zs @ Z) @ Zs, E.astype(complex))


def unified_curvature(z) -> np.ndarray:
    """``(1 + Z^* Z)^-1 dZ^* ^ (1 + Z Z^*)^-1 dZ`` as coefficients of ``dzbar_p ^ dz_q``.

    Result has shape ``(..., 4, 4, 2, 2)``; by construction there are no
    ``dz ^ dz`` or ``dzbar ^ dzbar`` terms.
    """
    Z = quat.from_coords(np.asarray(z, dtype=complex))
    Zs = quat.star(Z)
    M = np.linalg.inv(quat.I2 + Zs @ Z)
    N = np.linalg.inv(quat.I2 + Z @ Zs)
    MN = M[..., None, None, :, :] @ ET[:, None] @ N[..., None, None, :, :]
    return MN @ E[None, :]


def unified_connection() -> GaugeField:
    return GaugeField(unified_potential, signature="complex", name="unified connection")


def restriction_check(form: str, points) -> float:
    """Max deviation between the unified connection and the basic solution on a real form.

    ``split``: real points ``X`` of shape ``(n, 4)``, compared with the basic
    split anti-instanton.  ``euclidean``: points ``x`` in R^4, mapped by the
    quaternion identification and compared component-wise (in ``dx1..dx4``)
    with the Euclidean basic instanton.
    """
    points = np.asarray(points, dtype=float)
    if form == "split":
        lhs = unified_potential(points.astype(complex))
        rhs = basic_split_anti_instanton().potential(points)
    elif form == "euclidean":
        Z = quat.euclidean_matrix(points)
        Zs = quat.star(Z)
        lhs = _left(np.linalg.inv(quat.I2 + Zs @ Z) @ Zs, quat.EUCLIDEAN_BASIS)
        rhs = euclidean_basic_instanton().potential(points)
    else:
        raise ValueError(f"unknown real form {form!r}")
    return float(np.max(np.abs(lhs - rhs), initial=0.0))


@dataclass(frozen=True)
class ConformalElement:
    """``g = [[a, b], [c, d]]`` in SL(4, R) with 2x2 blocks."""

    g: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.g, dtype=float)
        if g.shape != (4, 4):
            raise DomainError(f"expected a 4x4 matrix, got {g.shape}")
        if abs(np.linalg.det(g) - 1.0) > 1e-10:
            raise DomainError(f"det(g) = {np.linalg.det(g):.12g}, expected 1")
        object.__setattr__(self, "g", g)

    @classmethod
    def from_blocks(cls, a, b, c, d) -> ConformalElement:
        return cls(np.block([[np.asarray(a), np.asarray(b)], [np.asarray(c), np.asarray(d)]]))

    @property
    def a(self):
        return self.g[:2, :2]

    @property
    def b(self):
        return self.g[:2, 2:]

    @property
    def c(self):
        return self.g[2:, :2]

    @property
    def d(self):
        return self.g[2:, 2:]

    @cached_property
    def is_normal_form(self) -> bool:
        return bool(np.max(np.abs(self.c)) <= 1e-12)


@dataclass(frozen=True)
class CenterScale:
    center: np.ndarray
    scale: float


def normal_form(g) -> tuple[np.ndarray, ConformalElement]:
    """Split ``g = R U`` with ``R`` in SO(4) and ``U`` block upper-triangular (``c = 0``)."""
    g = np.asarray(g.g if isinstance(g, ConformalElement) else g, dtype=float)
    R, U = np.linalg.qr(g)
    if np.linalg.det(R) < 0:
        R[:, 0] *= -1.0
        U[0, :] *= -1.0
    U[2:, :2] = 0.0
    return R, ConformalElement(U)


def plane_bundle_field(g) -> GaugeField:
    """Connection induced on the planes spanned by ``v(X) = g [X; I]``.

    ``A = (v^t v)^-1 v^t dv`` and ``F = (v^t v)^-1 dv^t ^ (1 - v (v^t v)^-1 v^t) dv``.
    With ``g = I`` this is the basic split anti-instanton; for general ``g`` it
    is the conformal image used as an oracle for :func:`conformal_pullback`.
    """
    g = np.asarray(g.g if isinstance(g, ConformalElement) else g, dtype=float)
    K = g[:, :2]

    def frame(x):
        X = quat.from_coords(np.asarray(x, dtype=float))
        v = K @ X + g[:, 2:]
        G = quat.transpose(v) @ v
        if np.any(np.abs(quat.det(G)) < 1e-300):
            raise DomainError("plane degenerates")
        return v, np.linalg.inv(G)

    def potential(x):
        v, Gi = frame(x)
        return _left(Gi @ quat.transpose(v) @ K, E)

    def curvature(x):
        v, Gi = frame(x)
        Pi = np.eye(4) - v @ Gi @ quat.transpose(v)
        return _two_sided(Gi, K.T @ Pi @ K, quat.I2, ET, E)

    return GaugeField(potential, curvature, name="plane bundle")


def _require_normal(g: ConformalElement) -> ConformalElement:
    if not isinstance(g, ConformalElement):
        g = ConformalElement(g)
    if not g.is_normal_form:
        raise DomainError("conformal element must have c = 0; reduce it with normal_form first")
    return g


def conformal_pullback(g) -> GaugeField:
    """``A_g = [d^t d + W^t W]^-1 W^t a dX`` with ``W = aX + b``, for ``c = 0``.

    The attached curvature is
    ``F_g = [d^t d + W^t W]^-1 dX^t ^ a^t [1 + W (d^t d)^-1 W^t]^-1 a dX``.
    """
    g = _require_normal(g)
    a, b, d = g.a, g.b, g.d
    if abs(np.linalg.det(d)) < 1e-14:
        raise DomainError("d block is singular")
    dtd = d.T @ d
    dtd_inv = np.linalg.inv(dtd)

    def blocks(x):
        X = quat.from_coords(np.asarray(x, dtype=float))
        W = a @ X + b
        Mi = np.linalg.inv(dtd + quat.transpose(W) @ W)
        return W, Mi

    def potential(x):
        W, Mi = blocks(x)
        return _left(Mi @ quat.transpose(W) @ a, E)

    def curvature(x):
        W, Mi = blocks(x)
        Ni = np.linalg.inv(quat.I2 + W @ dtd_inv @ quat.transpose(W))
        return _two_sided(Mi, a.T @ Ni @ a, quat.I2, ET, E)

    return GaugeField(potential, curvature, name="conformal pullback")


def det_field(A: GaugeField, x) -> np.ndarray:
    """Gauge-invariant scalar: ``dV`` coefficient of ``det F``."""
    return forms.det2form(A.F(x))


def center_scale(g) -> CenterScale:
    """Center ``-a^-1 b`` and scale ``2 det(a)^2 / det(d)^2`` of ``A_g``."""
    g = _require_normal(g)
    da = np.linalg.det(g.a)
    if abs(da) < 1e-14:
        raise DomainError("a block is singular")
    center = -np.linalg.solve(g.a, g.b)
    return CenterScale(center=center, scale=float(2.0 * da**2 / np.linalg.det(g.d) ** 2))


def grid_argmax(g, lo, hi, n: int = 9) -> tuple[np.ndarray, np.ndarray]:
    """Argmax of ``|det F_g|`` over an ``n^4`` grid on the box ``[lo, hi]``.

    Returns the maximizing point (coordinates ``x11, x12, x21, x22``) and the
    grid spacing per axis.
    """
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    axes = [np.linspace(lo[i], hi[i], n) for i in range(4)]
    pts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, 4)
    vals = np.abs(det_field(conformal_pullback(g), pts))
    return pts[int(np.argmax(vals))], (hi - lo) / (n - 1)


def invariant_field_deviation(g, points) -> float:
    """Max ``|det F|`` difference between the conformal image under ``g`` and the basic solution."""
    points = np.asarray(points, dtype=float)
    moved = det_field(plane_bundle_field(g), points)
    basic = det_field(basic_split_anti_instanton(), points)
    return float(np.max(np.abs(moved - basic)))


def so4_invariance_check(R, points) -> float:
    """Gauge-invariant deviation for a rotation ``R``; non-rotations are rejected."""
    R = np.asarray(R, dtype=float)
    if R.shape != (4, 4) or np.max(np.abs(R.T @ R - I4)) > 1e-10 or np.linalg.det(R) < 0:
        raise DomainError("expected a rotation in SO(4)")
    return invariant_field_deviation(R, points)


def block_rotation(theta: float, phi: float) -> np.ndarray:
    def rot(t):
        return np.array([[np.cos(t), -np.sin(t)], [np.sin(t), np.cos(t)]])

    out = np.zeros((4, 4))
    out[:2, :2] = rot(theta)
    out[2:, 2:] = rot(phi)
    return out
