"""Gauge fields, finite-difference curvature, gauge action and duality residuals."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np

from . import forms
from .errors import DomainError

Array = np.ndarray
PointMap = Callable[[Array], Array]

DEFAULT_FD_STEP = 1e-4


@dataclass(frozen=True)
class GaugeField:
    """A connection potential ``A = sum_k A_k dx_k`` on a coordinate patch.

    ``potential`` maps points of shape ``(..., dim)`` to components of shape
    ``(..., dim, r, r)``.  ``curvature``, when given, returns the closed form
    ``(..., dim (dim - 1) / 2, r, r)`` on the pair basis of :mod:`forms`.
    ``domain`` returns a boolean mask of admissible points.  ``density``
    optionally overrides the charge integrand (the volume coefficient of
    ``tr(F ^ F)``), for fields whose curvature lives in a frame that is awkward
    to evaluate in bulk.
    """

    potential: PointMap
    curvature: Optional[PointMap] = None
    dim: int = 4
    domain: Optional[Callable[[Array], Array]] = None
    signature: str = "split"
    density: Optional[PointMap] = None
    name: str = ""

    def __call__(self, x) -> Array:
        x = np.asarray(x, dtype=float)
        self.check_domain(x)
        return self.potential(x)

    def check_domain(self, x) -> None:
        if self.domain is None:
            return
        ok = np.asarray(self.domain(np.asarray(x, dtype=float)))
        if not np.all(ok):
            raise DomainError(f"point outside the domain of {self.name or 'gauge field'}")

    def F(self, x) -> Array:
        """Closed-form curvature if attached, finite differences otherwise."""
        x = np.asarray(x, dtype=float)
        if self.curvature is None:
            return curvature_fd(self, x)
        self.check_domain(x)
        return self.curvature(x)

    def pairing(self) -> Array:
        return forms.VOLUME_PAIRING if self.signature == "split" else forms.CANONICAL_PAIRING

    def charge_density(self, x) -> Array:
        """Volume coefficient of ``tr(F ^ F)`` (real part)."""
        x = np.asarray(x, dtype=float)
        if self.density is not None:
            return np.real(self.density(x))
        F = self.F(x)
        return np.real(forms.trace_wedge22(F, F, self.pairing()))


def constant_field(components, dim: int = 4, name: str = "constant") -> GaugeField:
    C = np.asarray(components)

    def potential(x):
        return np.broadcast_to(C, np.shape(x)[:-1] + C.shape).copy()

    return GaugeField(potential=potential, dim=dim, name=name)


def _steps(x, h):
    scale = 1.0 + np.linalg.norm(x, axis=-1, keepdims=True)
    return h * scale


def derivative_fd(func: PointMap, x, h: float = DEFAULT_FD_STEP, domain=None) -> Array:
    """All first partials of ``func`` at ``x``: result ``[..., k, *out]`` is d/dx_k.

    Central differences at steps ``h`` and ``h/2`` combined by one Richardson
    step, so the truncation error is fourth order.
    """
    x = np.asarray(x, dtype=float)
    n = x.shape[-1]
    hs = _steps(x, h)
    eye = np.eye(n)
    # offsets: +h, -h, +h/2, -h/2 along each axis -> shape (4, n, ..., n)
    offsets = np.array([1.0, -1.0, 0.5, -0.5])[:, None, None] * eye[None, :, :]
    pts = x[None, None] + offsets.reshape((4, n) + (1,) * (x.ndim - 1) + (n,)) * hs
    if domain is not None and not np.all(domain(pts)):
        raise DomainError("finite-difference stencil leaves the domain")
    vals = np.asarray(func(pts.reshape((-1,) + x.shape)))
    vals = vals.reshape((4, n) + x.shape[:-1] + vals.shape[x.ndim:])
    hb = hs.reshape(x.shape[:-1] + (1,) * (vals.ndim - x.ndim - 1))
    d_full = (vals[0] - vals[1]) / (2.0 * hb)
    d_half = (vals[2] - vals[3]) / hb
    d = (4.0 * d_half - d_full) / 3.0
    return np.moveaxis(d, 0, x.ndim - 1)


def curvature_from_derivative(A: Array, dA: Array) -> Array:
    """``F_kl = d_k A_l - d_l A_k + [A_k, A_l]`` on the pair basis.

    ``A`` has shape ``(..., n, r, r)`` and ``dA[..., k, l]`` is ``d_k A_l``.
    """
    n = A.shape[-3]
    ks, ls = np.triu_indices(n, 1)
    Ak, Al = A[..., ks, :, :], A[..., ls, :, :]
    return dA[..., ks, ls, :, :] - dA[..., ls, ks, :, :] + Ak @ Al - Al @ Ak


def curvature_fd(A: GaugeField, x, h: float = DEFAULT_FD_STEP) -> Array:
    """Curvature of ``A`` at ``x`` (batched over leading axes) by finite differences."""
    x = np.asarray(x, dtype=float)
    A.check_domain(x)
    dA = derivative_fd(A.potential, x, h, A.domain)
    return curvature_from_derivative(A.potential(x), dA)


def _combo_residual(F, combos) -> Array:
    F = np.asarray(F)
    parts = np.stack([sum(c * F[..., i, :, :] for i, c in combo) for combo in combos], axis=-3)
    r = np.max(np.abs(parts), axis=(-3, -2, -1))
    return float(r) if r.ndim == 0 else r


_SDYM = (((forms.I01, 1.0),), ((forms.I23, 1.0),), ((forms.I03, 1.0), (forms.I12, -1.0)))
_ASDYM = (((forms.I02, 1.0),), ((forms.I13, 1.0),), ((forms.I03, 1.0), (forms.I12, 1.0)))
# Euclidean pair indices coincide with the split ones under x_{k+1} <-> k.
_E_SD = (((0, 1.0), (5, 1.0)), ((1, 1.0), (4, -1.0)), ((2, 1.0), (3, 1.0)))
_E_ASD = (((0, 1.0), (5, -1.0)), ((1, 1.0), (4, 1.0)), ((2, 1.0), (3, -1.0)))


def sdym_residual(F) -> float | Array:
    """Max entry of ``F_{11,12}``, ``F_{21,22}`` and ``F_{11,22} - F_{12,21}``."""
    return _combo_residual(F, _SDYM)


def asdym_residual(F) -> float | Array:
    """Max entry of ``F_{11,21}``, ``F_{12,22}`` and ``F_{11,22} + F_{12,21}``."""
    return _combo_residual(F, _ASDYM)


def euclidean_sd_residual(F) -> float | Array:
    """Max entry of ``F12 + F34``, ``F13 - F24`` and ``F14 + F23``."""
    return _combo_residual(F, _E_SD)


def euclidean_asd_residual(F) -> float | Array:
    return _combo_residual(F, _E_ASD)


def gauge_apply(g: PointMap, A: GaugeField, dg: Optional[PointMap] = None,
                h: float = DEFAULT_FD_STEP) -> GaugeField:
    """Gauge transform ``A -> g^-1 dg + g^-1 A g``.

    ``dg(x)`` returns ``[..., k, r, r]`` partials of ``g``; finite differences
    are used when it is omitted.  An attached curvature becomes ``g^-1 F g``.
    """

    def ginv(x):
        G = np.asarray(g(x))
        d = np.linalg.det(G)
        if np.any(np.abs(d) <= 1e-300):
            raise DomainError("gauge transformation is singular")
        return G, np.linalg.inv(G)

    def potential(x):
        G, Gi = ginv(x)
        D = dg(x) if dg is not None else derivative_fd(g, x, h, A.domain)
        Gi_ = Gi[..., None, :, :]
        return Gi_ @ D + Gi_ @ A.potential(x) @ G[..., None, :, :]

    curvature = None
    if A.curvature is not None:
        def curvature(x):
            G, Gi = ginv(x)
            return Gi[..., None, :, :] @ A.curvature(x) @ G[..., None, :, :]

    return replace(A, potential=potential, curvature=curvature, density=None,
                   name=f"gauge({A.name})")


def transpose_point_field(A: GaugeField, name: str = "") -> GaugeField:
    """Pullback of ``A`` along ``X -> X^t``.

    The components at ``X`` are those of ``A`` at ``X^t`` with the ``x12`` and
    ``x21`` slots exchanged.  This carries the basic split instanton to the
    anti-instanton and back.
    """
    perm = np.array([0, 2, 1, 3])

    def potential(x):
        xt = np.asarray(x)[..., perm]
        return A.potential(xt)[..., perm, :, :]

    return GaugeField(potential=potential, dim=A.dim, domain=A.domain, signature=A.signature,
                      name=name or f"transpose({A.name})")
