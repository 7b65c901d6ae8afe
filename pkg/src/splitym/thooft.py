"""t'Hooft ansatz, its transformation and gluing laws, the X-ray transform and quadric seeds.

Scalar seeds are callables on coordinate arrays ``(..., 4)``.  The ansatz is
``A(f) = -(df/dX) / f dX`` with the transposed gradient layout of
:func:`grassmann.grad_matrix`; it is anti-self-dual exactly when ``box22 f = 0``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import forms, quat
from .connection import GaugeField, asdym_residual, curvature_fd, derivative_fd
from .errors import DomainError, SingularSeedError
from .grassmann import (
    Plane,
    Transition,
    box22,
    grad_matrix,
    tangent_matrix,
    transition_apply,
    transition_coords,
)

E = quat.BASIS


@dataclass(frozen=True)
class ScalarSolution:
    """A seed ``f`` with optional closed-form coordinate gradient ``(..., 4)``."""

    func: Callable[[np.ndarray], np.ndarray]
    grad: Optional[Callable[[np.ndarray], np.ndarray]] = None
    nonvanishing: bool = True
    name: str = ""
    fd_step: float = 1e-4

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        val = np.asarray(self.func(x))
        if self.nonvanishing and np.any(val == 0):
            raise SingularSeedError(f"seed {self.name or 'f'} vanishes at an evaluated point")
        return val

    def gradient(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.grad is not None:
            return np.asarray(self.grad(x))
        return derivative_fd(self.func, x, self.fd_step)

    def layout_gradient(self, X) -> np.ndarray:
        """``df/dX`` with entry ``(i, j) = df/dx_ji``."""
        return grad_matrix(self.func, X, self.fd_step, grad=self.grad)

    def scaled(self, c: float) -> ScalarSolution:
        grad = (lambda x: c * self.grad(x)) if self.grad is not None else None
        return ScalarSolution(lambda x: c * self.func(x), grad, self.nonvanishing, f"{c}*{self.name}", self.fd_step)


def as_solution(f) -> ScalarSolution:
    return f if isinstance(f, ScalarSolution) else ScalarSolution(f)


# ---------------------------------------------------------------- seed families

def f0() -> ScalarSolution:
    """``det(1 + X^t X)^(-1/2)``, whose ansatz is the basic split anti-instanton."""

    def func(x):
        X = quat.from_coords(x)
        return quat.det(quat.I2 + quat.transpose(X) @ X) ** -0.5

    def grad(x):
        X = quat.from_coords(x)
        G = quat.I2 + quat.transpose(X) @ X
        L = -func(x)[..., None, None] * np.linalg.inv(G) @ quat.transpose(X)
        return quat.to_coords(quat.transpose(L))

    return ScalarSolution(func, grad, name="f0")


def quadratic_seed(c: float, b, S) -> ScalarSolution:
    """``c + b.x + x^t S x``; its ``box22`` is the constant :func:`quadratic_box`."""
    b = np.asarray(b, dtype=float)
    S = np.asarray(S, dtype=float)

    def func(x):
        return c + x @ b + np.einsum("...i,ij,...j->...", x, S, x)

    def grad(x):
        return b + x @ (S + S.T)

    return ScalarSolution(func, grad, nonvanishing=False, name="quadratic")


def quadratic_box(S) -> float:
    """Exact ``box22`` of ``x^t S x``."""
    S = np.asarray(S, dtype=float)
    return float(S[0, 3] + S[3, 0] - S[1, 2] - S[2, 1])


def quadric_seed(Q, g=None) -> ScalarSolution:
    """X-ray transform of ``1 / Q(x)`` in the chart ``g``: ``det(V^t Q V)^(-1/2)``, ``V = g [X; I]``."""
    Q = np.asarray(Q, dtype=float)
    g = np.eye(4) if g is None else np.asarray(g, dtype=float)
    K, D = g[:, :2], g[:, 2:]

    def parts(x):
        V = K @ quat.from_coords(x) + D
        H = quat.transpose(V) @ Q @ V
        return V, H

    def func(x):
        _, H = parts(np.asarray(x, dtype=float))
        return quat.det(H) ** -0.5

    def grad(x):
        V, H = parts(np.asarray(x, dtype=float))
        L = -func(x)[..., None, None] * np.linalg.inv(H) @ quat.transpose(V) @ Q @ K
        return quat.to_coords(quat.transpose(L))

    return ScalarSolution(func, grad, name="quadric")


def quadric_field(Q, g=None) -> GaugeField:
    """Ansatz of :func:`quadric_seed` with its closed-form curvature.

    ``A = H^-1 V^t Q K dX`` and ``F = H^-1 dX^t ^ K^t (Q - Q V H^-1 V^t Q) K dX``,
    the connection of the planes ``V(X)`` for the inner product ``Q``.
    """
    Q = np.asarray(Q, dtype=float)
    g = np.eye(4) if g is None else np.asarray(g, dtype=float)
    K, D = g[:, :2], g[:, 2:]
    ks, ls = np.triu_indices(4, 1)
    ET = quat.transpose(E)

    def parts(x):
        V = K @ quat.from_coords(np.asarray(x, dtype=float)) + D
        Hi = np.linalg.inv(quat.transpose(V) @ Q @ V)
        return V, Hi

    def potential(x):
        V, Hi = parts(x)
        return (Hi @ quat.transpose(V) @ Q @ K)[..., None, :, :] @ E

    def curvature(x):
        V, Hi = parts(x)
        QV = Q @ V
        M = (K.T @ (Q - QV @ Hi @ quat.transpose(QV)) @ K)[..., None, :, :]
        return Hi[..., None, :, :] @ (ET[ks] @ M @ E[ls] - ET[ls] @ M @ E[ks])

    return GaugeField(potential, curvature, name="quadric ansatz")


# ---------------------------------------------------------------- ansatz

def local_ansatz(f) -> GaugeField:
    """``A(f) = -(df/dX) / f dX``; raises :class:`SingularSeedError` where ``f = 0``."""
    f = as_solution(f)

    def potential(x):
        x = np.asarray(x, dtype=float)
        val = np.asarray(f.func(x))
        if np.any(val == 0) or not np.all(np.isfinite(val)):
            raise SingularSeedError("seed vanishes at an evaluated point")
        L = quat.transpose(quat.from_coords(f.gradient(x)))
        return (-L / val[..., None, None])[..., None, :, :] @ E

    return GaugeField(potential, name=f"ansatz({f.name})")


def ansatz_iff_check(f, X, h: float = 1e-4) -> tuple[float, float]:
    """``(asdym residual of FD curvature of A(f), box22 f)`` at ``X``."""
    f = as_solution(f)
    x = quat.to_coords(np.asarray(X, dtype=float))
    F = curvature_fd(local_ansatz(f), x, h)
    return float(np.max(asdym_residual(F))), float(np.max(np.abs(box22(f.func, quat.from_coords(x)))))


def bounded_away(residuals, threshold: float = 1e-3) -> bool:
    """Majority rule: the residual exceeds ``threshold`` at more than half of the samples."""
    residuals = np.asarray(residuals, dtype=float)
    return bool(np.count_nonzero(residuals > threshold) * 2 > residuals.size)


def transform_check(t: Transition, f, X) -> float:
    """``Psi^*(A(f)) = pi A(f o Psi) pi^-1`` component-wise.

    The left side is the chain rule with the closed-form tangent map; the
    right side differentiates ``f o Psi`` numerically.
    """
    f = as_solution(f)
    X = np.asarray(X, dtype=float)
    x = quat.to_coords(X)
    psi = transition_coords(t, x)
    A_at_psi = local_ansatz(f).potential(psi)
    J = tangent_matrix(t, X)  # [j, k] = d Psi_j / d x_k
    lhs = np.einsum("jk,jab->kab", J, A_at_psi)
    pulled = ScalarSolution(lambda y: f.func(transition_coords(t, y)), name="f o Psi")
    P = t.pi(X)
    rhs = P @ local_ansatz(pulled).potential(x) @ np.linalg.inv(P)
    return float(np.max(np.abs(lhs - rhs)))


def _abs_det_pi_field(t: Transition) -> GaugeField:
    return local_ansatz(ScalarSolution(lambda y: np.abs(t.det_pi(quat.from_coords(y))), name="|det pi|"))


def _log_derivative(t: Transition, X) -> np.ndarray:
    """Components of ``pi^-1 d pi = pi^-1 k21 dX``."""
    return (np.linalg.inv(t.pi(X)) @ t.k21) @ E


def gluing_identity_check(t: Transition, X) -> float:
    """Residual of ``A(|det pi|) + pi^-1 d pi = 0`` with ``A`` from an FD gradient."""
    X = np.asarray(X, dtype=float)
    A = _abs_det_pi_field(t).potential(quat.to_coords(X))
    return float(np.max(np.abs(A + _log_derivative(t, X))))


def det_pi_ansatz_residual(t: Transition, X) -> float:
    """``A(det pi) = -pi^-1 k21 dX``, FD gradient against the closed form."""
    X = np.asarray(X, dtype=float)
    A = local_ansatz(ScalarSolution(lambda y: t.det_pi(quat.from_coords(y)))).potential(quat.to_coords(X))
    return float(np.max(np.abs(A + _log_derivative(t, X))))


def gluing_composition_check(g, h, l, X) -> float:
    """``A_gl = pi_gh^-1 (Psi_gh^* A_hl) pi_gh + A_gh`` for ``A_t = A(|det pi_t|)``."""
    gh, hl, gl = Transition.between(g, h), Transition.between(h, l), Transition.between(g, l)
    X = np.asarray(X, dtype=float)
    x = quat.to_coords(X)
    Y = transition_apply(gh, X)
    A_hl = _abs_det_pi_field(hl).potential(quat.to_coords(Y))
    pulled = np.einsum("jk,jab->kab", tangent_matrix(gh, X), A_hl)
    P = gh.pi(X)
    lhs = np.linalg.inv(P) @ pulled @ P + _abs_det_pi_field(gh).potential(x)
    return float(np.max(np.abs(lhs - _abs_det_pi_field(gl).potential(x))))


# ---------------------------------------------------------------- X-ray transform

@dataclass(frozen=True)
class HomogeneousField:
    """``phi`` on R^4 minus the origin with ``phi(lambda x) = lambda^degree phi(x)``.

    Homogeneity is spot-checked on construction at random rays, including
    negative ``lambda``.
    """

    func: Callable[[np.ndarray], np.ndarray]
    grad: Optional[Callable[[np.ndarray], np.ndarray]] = None
    degree: int = -2
    name: str = ""
    check_rays: int = 16

    def __post_init__(self):
        rng = np.random.default_rng(12345)
        x = rng.normal(size=(self.check_rays, 4))
        lam = rng.uniform(0.3, 3.0, size=self.check_rays) * rng.choice([-1.0, 1.0], size=self.check_rays)
        base = np.asarray(self.func(x))
        scaled = np.asarray(self.func(lam[:, None] * x))
        expect = lam ** float(self.degree) * base
        if np.any(np.abs(scaled - expect) > 1e-9 * np.maximum(1.0, np.abs(expect))):
            raise DomainError(f"{self.name or 'phi'} is not homogeneous of degree {self.degree}")

    def __call__(self, x):
        return self.func(x)


def inverse_square() -> HomogeneousField:
    """``1 / |x|^2``."""
    return HomogeneousField(lambda x: 1.0 / np.sum(x * x, axis=-1),
                            lambda x: -2.0 * x / np.sum(x * x, axis=-1)[..., None] ** 2,
                            name="1/|x|^2")


def inverse_quadric(Q) -> HomogeneousField:
    """``1 / Q(x)`` for a positive-definite symmetric ``Q``."""
    Q = np.asarray(Q, dtype=float)
    if np.max(np.abs(Q - Q.T)) > 1e-12 or np.min(np.linalg.eigvalsh(Q)) <= 0:
        raise DomainError("Q must be symmetric positive definite")

    def func(x):
        return 1.0 / np.einsum("...i,ij,...j->...", x, Q, x)

    def grad(x):
        return -2.0 * (x @ Q) * func(x)[..., None] ** 2

    return HomogeneousField(func, grad, name="1/Q(x)")


def _basis(p) -> np.ndarray:
    if isinstance(p, Plane):
        return p.rep
    B = np.asarray(p, dtype=float)
    if B.shape[-2:] != (4, 2):
        raise DomainError(f"expected a plane or a (..., 4, 2) basis, got {B.shape}")
    return B


def _circle_mean(values_at, tol: float, n0: int = 16, nmax: int = 1 << 16):
    """Mean over ``theta in [0, pi)`` by the trapezoid rule, doubling nodes until stable.

    The integrands are pi-periodic and smooth, so the rule converges
    geometrically once the nodes resolve them.
    """
    n = n0
    prev = None
    while n <= nmax:
        theta = np.pi * np.arange(n) / n
        vals = values_at(theta)
        if not np.all(np.isfinite(vals)):
            raise DomainError("phi is singular on the plane's unit circle")
        cur = np.mean(vals, axis=-1)
        if prev is not None and np.all(np.abs(cur - prev) <= tol * np.maximum(1.0, np.abs(cur))):
            return cur
        prev = cur
        n *= 2
    raise DomainError("X-ray quadrature did not converge; phi may be singular on the plane")


def xray_transform(phi, p, tol: float = 1e-13) -> np.ndarray:
    """``(1/pi) int_0^pi phi(cos t u + sin t v) dt`` for the basis ``(u, v)`` of ``p``.

    ``p`` is a :class:`Plane` (orthonormal basis) or raw bases ``(..., 4, 2)``.
    Replacing the basis by ``(u, v) r`` multiplies the value by ``|det r|^-1``.
    """
    B = _basis(p)

    def values_at(theta):
        c = np.stack([np.cos(theta), np.sin(theta)])  # (2, n)
        w = np.swapaxes(B @ c, -1, -2)  # (..., n, 4)
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.asarray(phi(w))

    out = _circle_mean(values_at, tol)
    return float(out) if np.ndim(out) == 0 else out


def gram_oracle(u, v) -> float:
    """Closed form of the transform of ``1/|x|^2`` on the span of ``u, v``: ``1 / sqrt(ab - c^2)``."""
    a, b, c = u @ u, v @ v, u @ v
    return float(1.0 / np.sqrt(a * b - c * c))


def xray_section(phi: HomogeneousField, g=None, tol: float = 1e-13) -> ScalarSolution:
    """Chart representative ``f(X) = xray(phi, g [X; I])`` using the raw columns.

    The gradient differentiates under the integral when ``phi.grad`` is known.
    """
    g = np.eye(4) if g is None else np.asarray(g, dtype=float)
    K, D = g[:, :2], g[:, 2:]

    def basis(x):
        return K @ quat.from_coords(np.asarray(x, dtype=float)) + D

    def func(x):
        return xray_transform(phi, basis(x), tol)

    grad = None
    if phi.grad is not None:
        def grad(x):
            B = basis(x)

            def values_at(theta):
                c = np.stack([np.cos(theta), np.sin(theta)])
                w = np.swapaxes(B @ c, -1, -2)  # (..., n, 4)
                gphi = phi.grad(w) @ K  # (..., n, 2): K^t grad phi
                # d/dx_ij = (K^t grad phi)_i c_j
                outer = gphi[..., :, None] * np.swapaxes(c, 0, 1)[:, None, :]
                return np.moveaxis(outer.reshape(outer.shape[:-2] + (4,)), -2, -1)

            return _circle_mean(values_at, tol)

    return ScalarSolution(func, grad, name=f"xray({phi.name})")


# ---------------------------------------------------------------- quadric orbits

def _det_field(A: GaugeField, x) -> np.ndarray:
    F = A.curvature(x) if A.curvature is not None else curvature_fd(A, x)
    return forms.det2form(F)


def pushed_quadric(Q, R) -> np.ndarray:
    """Matrix of ``x -> Q(R^-1 x)``."""
    Ri = np.linalg.inv(np.asarray(R, dtype=float))
    return Ri.T @ np.asarray(Q, dtype=float) @ Ri


def quadric_orbit_check(Q, R, points) -> float:
    """Invariance test: ``|det F|`` fields of the ansatz for ``Q o R^-1`` and for ``Q``.

    Both fields are FD curvatures of the ansatz of closed-form quadric seeds.
    The residual vanishes for ``R`` in the stabilizer of ``Q``.
    """
    points = np.asarray(points, dtype=float)
    moved = _det_field(local_ansatz(quadric_seed(pushed_quadric(Q, R))), points)
    base = _det_field(local_ansatz(quadric_seed(Q)), points)
    return float(np.max(np.abs(moved - base)))


def quadric_equivariance_check(Q, R, points) -> float:
    """``det F_{Q o R^-1}(X) = det F_Q(Psi(X)) det(pi)^-4`` for ``Psi`` the chart change by ``R^-1``.

    Points where ``Psi`` is undefined must not be passed.
    """
    points = np.asarray(points, dtype=float)
    t = Transition(np.linalg.inv(np.asarray(R, dtype=float)))
    X = quat.from_coords(points)
    lhs = _det_field(quadric_field(pushed_quadric(Q, R)), points)
    rhs = _det_field(quadric_field(Q), transition_coords(t, points)) / t.det_pi(X) ** 4
    return float(np.max(np.abs(lhs - rhs) / np.maximum(1.0, np.abs(lhs))))
