"""Charts on the Grassmannian of 2-planes in R^4, their transitions and the operator box22.

A chart is labelled by ``g`` in SL(4, R) and sends a 2x2 matrix ``X`` to the
plane spanned by the columns of ``g [X; I]``.  For charts ``g`` and ``h`` put
``k = h^-1 g = [[k11, k12], [k21, k22]]`` and ``pi(X) = k21 X + k22``; then the
change of coordinates is ``Psi(X) = (k11 X + k12) pi(X)^-1``.

Scalar fields are callables on coordinate arrays ``(..., 4)`` (order
``x11, x12, x21, x22``) returning ``(...)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Dict, Hashable

import numpy as np
from scipy.linalg import expm

from . import quat
from .connection import derivative_fd
from .errors import DomainError, OutOfChartError

ScalarField = Callable[[np.ndarray], np.ndarray]

PLANE_TOL = 1e-8
BOX_STEP = 1e-3


def _sl4(g) -> np.ndarray:
    g = np.asarray(g, dtype=float)
    if g.shape != (4, 4):
        raise DomainError(f"expected a 4x4 matrix, got {g.shape}")
    if abs(np.linalg.det(g) - 1.0) > 1e-10:
        raise DomainError(f"det = {np.linalg.det(g):.12g}, expected 1")
    return g


def random_sl4(rng: np.random.Generator, scale: float = 0.5) -> np.ndarray:
    """``expm`` of a random traceless matrix, so the determinant is exactly 1 up to rounding."""
    m = rng.normal(size=(4, 4)) * scale
    m -= np.trace(m) / 4 * np.eye(4)
    g = expm(m)
    return g / np.linalg.det(g) ** 0.25


@dataclass(frozen=True)
class Plane:
    """A 2-plane in R^4, stored by an orthonormal basis of columns."""

    rep: np.ndarray

    def __post_init__(self):
        rep = np.asarray(self.rep, dtype=float)
        if rep.shape != (4, 2):
            raise DomainError(f"plane representative must be 4x2, got {rep.shape}")
        q, r = np.linalg.qr(rep)
        if np.min(np.abs(np.diag(r))) <= PLANE_TOL * max(1.0, np.max(np.abs(rep))):
            raise DomainError("representative is rank deficient")
        object.__setattr__(self, "rep", q)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Plane):
            return NotImplemented
        s = np.linalg.svd(np.hstack([self.rep, other.rep]), compute_uv=False)
        return bool(s[2] <= PLANE_TOL)

    __hash__ = None


@dataclass(frozen=True)
class Chart:
    g: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "g", _sl4(self.g))


def chart_map(c: Chart, X) -> Plane:
    X = np.asarray(X, dtype=float)
    return Plane(c.g @ np.vstack([X, np.eye(2)]))


def chart_inverse(c: Chart, p: Plane) -> np.ndarray:
    w = np.linalg.solve(c.g, p.rep)
    top, bottom = w[:2], w[2:]
    if np.min(np.linalg.svd(bottom, compute_uv=False)) <= 1e-12:
        raise OutOfChartError("plane is not in the chart")
    return top @ np.linalg.inv(bottom)


@dataclass(frozen=True)
class Transition:
    """Blocks of ``k = h^-1 g`` for the change of coordinates from chart g to chart h."""

    k: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "k", _sl4(self.k))

    @classmethod
    def between(cls, g, h) -> Transition:
        g = g.g if isinstance(g, Chart) else g
        h = h.g if isinstance(h, Chart) else h
        return cls(np.linalg.solve(h, g))

    @classmethod
    def identity(cls) -> Transition:
        return cls(np.eye(4))

    k11 = property(lambda self: self.k[:2, :2])
    k12 = property(lambda self: self.k[:2, 2:])
    k21 = property(lambda self: self.k[2:, :2])
    k22 = property(lambda self: self.k[2:, 2:])

    def pi(self, X) -> np.ndarray:
        """``k21 X + k22``."""
        return self.k21 @ np.asarray(X, dtype=float) + self.k22

    def det_pi(self, X) -> np.ndarray:
        return quat.det(self.pi(X))


def _pi_checked(t: Transition, X, tol=1e-12):
    P = t.pi(X)
    if np.any(np.abs(quat.det(P)) <= tol):
        raise OutOfChartError("point outside the transition domain (det(k21 X + k22) = 0)")
    return P


def transition_apply(t: Transition, X) -> np.ndarray:
    """``Psi(X) = (k11 X + k12)(k21 X + k22)^-1``; batched over leading axes."""
    X = np.asarray(X, dtype=float)
    P = _pi_checked(t, X)
    return (t.k11 @ X + t.k12) @ np.linalg.inv(P)


def transition_coords(t: Transition, x) -> np.ndarray:
    """``Psi`` acting on coordinate arrays ``(..., 4)``."""
    return quat.to_coords(transition_apply(t, quat.from_coords(np.asarray(x, dtype=float))))


def tangent_transition(t: Transition, X, V) -> np.ndarray:
    """``T_X Psi (V) = (k11 - Psi(X) k21) V (k21 X + k22)^-1``."""
    X = np.asarray(X, dtype=float)
    Pinv = np.linalg.inv(_pi_checked(t, X))
    Psi = (t.k11 @ X + t.k12) @ Pinv
    return (t.k11 - Psi @ t.k21) @ np.asarray(V) @ Pinv


def tangent_matrix(t: Transition, X) -> np.ndarray:
    """4x4 Jacobian of ``Psi`` in coordinates (columns are images of the basis)."""
    X = np.asarray(X, dtype=float)
    cols = [quat.to_coords(tangent_transition(t, X, quat.BASIS[k])) for k in range(4)]
    return np.stack(cols, axis=-1)


def jacobian_fd(t: Transition, X, h: float = 1e-4) -> np.ndarray:
    """Finite-difference Jacobian of ``Psi`` in coordinates, ``[i, k] = d Psi_i / d x_k``."""
    x = quat.to_coords(np.asarray(X, dtype=float))
    d = derivative_fd(lambda y: transition_coords(t, y), x, h)
    return np.swapaxes(d, -1, -2)


def conformal_factor(t: Transition, X) -> np.ndarray:
    """``det(k21 X + k22)^-2``, the factor by which ``Psi`` rescales ``2 det(dX)``."""
    return 1.0 / quat.det(_pi_checked(t, X)) ** 2


def conformal_factor_residual(t: Transition, X, V) -> float:
    """``|2 det(T Psi V) - factor * 2 det V|`` for a tangent vector ``V``."""
    lhs = 2.0 * quat.det(tangent_transition(t, X, V))
    rhs = conformal_factor(t, X) * 2.0 * quat.det(np.asarray(V))
    return float(np.max(np.abs(lhs - rhs)))


def conformal_factor_identity_residual(t: Transition, X) -> float:
    """``|det(k11 - Psi k21) - det(k21 X + k22)^-1|``."""
    X = np.asarray(X, dtype=float)
    Psi = transition_apply(t, X)
    return float(np.max(np.abs(quat.det(t.k11 - Psi @ t.k21) - 1.0 / t.det_pi(X))))


def grad_matrix(f: ScalarField, X, h: float = 1e-4, grad: Callable | None = None) -> np.ndarray:
    """Gradient in the transposed layout: entry ``(i, j)`` is ``df/dx_ji``.

    With this layout ``df(V) = tr(grad_matrix(f, X) V)``.  ``grad``, when
    given, returns the ordinary coordinate gradient ``(..., 4)``.
    """
    x = quat.to_coords(np.asarray(X, dtype=float))
    g = grad(x) if grad is not None else derivative_fd(f, x, h)
    return quat.transpose(quat.from_coords(g))


def gradient_transform_check(t: Transition, f: ScalarField, X, h: float = 1e-4) -> float:
    """``d(f o Psi)/dX = pi^-1 (df/dX o Psi) (k11 - Psi k21)``; FD on both gradients."""
    X = np.asarray(X, dtype=float)
    Psi = transition_apply(t, X)
    lhs = grad_matrix(lambda y: f(transition_coords(t, y)), X, h)
    rhs = np.linalg.inv(t.pi(X)) @ grad_matrix(f, Psi, h) @ (t.k11 - Psi @ t.k21)
    return float(np.max(np.abs(lhs - rhs)))


def pullback_dX_check(t: Transition, X, h: float = 1e-4) -> float:
    """``Psi^*(dX) = (k11 - Psi k21) dX pi^-1`` against the FD Jacobian."""
    X = np.asarray(X, dtype=float)
    fd = jacobian_fd(t, X, h)
    closed = tangent_matrix(t, X)
    return float(np.max(np.abs(fd - closed)))


def box22(f: ScalarField, X, h: float = BOX_STEP) -> np.ndarray:
    """``d^2 f / dx11 dx22 - d^2 f / dx12 dx21`` by the four-point cross stencil.

    ``X`` may be a matrix ``(..., 2, 2)``; the step is ``h (1 + |X|)``.  Steps
    ``h`` and ``h/2`` are Richardson-combined, so the error is ``O(h^4)``.
    """
    x = quat.to_coords(np.asarray(X, dtype=float))
    base = h * (1.0 + np.linalg.norm(x, axis=-1))

    def mixed(a, b, hs):
        ea = np.eye(4)[a] * hs[..., None]
        eb = np.eye(4)[b] * hs[..., None]
        return (f(x + ea + eb) - f(x + ea - eb) - f(x - ea + eb) + f(x - ea - eb)) / (4.0 * hs**2)

    def box(hs):
        return mixed(0, 3, hs) - mixed(1, 2, hs)

    return (4.0 * box(base / 2) - box(base)) / 3.0


def box22_covariance_check(t: Transition, f: ScalarField, X, h: float = BOX_STEP) -> tuple[float, float]:
    """Both sides of ``box(|det pi|^-1 f o Psi) = |det pi|^-3 (box f) o Psi``.

    Returns ``(lhs, rhs)`` evaluated at ``X`` by finite differences.
    """
    X = np.asarray(X, dtype=float)
    _pi_checked(t, X)

    def pulled(y):
        Y = quat.from_coords(y)
        return f(transition_coords(t, y)) / np.abs(t.det_pi(Y))

    lhs = box22(pulled, X, h)
    rhs = box22(f, transition_apply(t, X), h) / np.abs(t.det_pi(X)) ** 3
    return float(lhs), float(rhs)


def pi_cocycle_residual(g, h, l, X) -> float:
    """``|pi_hl(Psi_gh(X)) pi_gh(X) - pi_gl(X)|``."""
    gh, hl, gl = Transition.between(g, h), Transition.between(h, l), Transition.between(g, l)
    X = np.asarray(X, dtype=float)
    lhs = hl.pi(transition_apply(gh, X)) @ gh.pi(X)
    return float(np.max(np.abs(lhs - gl.pi(X))))


def transition_cocycle_residual(g, h, l, X) -> float:
    """``|Psi_hl(Psi_gh(X)) - Psi_gl(X)|``."""
    gh, hl, gl = Transition.between(g, h), Transition.between(h, l), Transition.between(g, l)
    X = np.asarray(X, dtype=float)
    return float(np.max(np.abs(transition_apply(hl, transition_apply(gh, X)) - transition_apply(gl, X))))


@dataclass
class SectionRep:
    """Local representatives ``f_g`` of a section of ``eps[n]`` (optionally twisted by ``eps~``).

    On overlaps the representatives should satisfy
    ``f_h(Psi_gh(X)) = cocycle(t, X) f_g(X)`` with
    ``cocycle = det(pi)^-n``, times ``sign(det pi)`` when twisted.  So
    ``n = -1`` twisted gives ``|det pi|``.  Consistency is checked, not enforced.
    """

    weight: int
    twisted: bool = False
    charts: Dict[Hashable, tuple[np.ndarray, ScalarField]] = field(default_factory=dict)

    def add(self, key: Hashable, g, f: ScalarField) -> None:
        self.charts[key] = (_sl4(g), f)

    def cocycle(self, t: Transition, X) -> np.ndarray:
        d = t.det_pi(X)
        out = d ** float(-self.weight)
        return out * np.sign(d) if self.twisted else out

    def overlap_residual(self, key_g: Hashable, key_h: Hashable, x) -> float:
        g, fg = self.charts[key_g]
        h, fh = self.charts[key_h]
        t = Transition.between(g, h)
        x = np.asarray(x, dtype=float)
        lhs = fh(transition_coords(t, x))
        rhs = self.cocycle(t, quat.from_coords(x)) * fg(x)
        return float(np.max(np.abs(lhs - rhs)))
