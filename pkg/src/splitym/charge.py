"""Topological charge: compactified 4-d cubature and the one-dimensional reductions."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .connection import GaugeField
from .errors import ChargeAccuracyError

SCHEMES = {"gauss-kronrod": "gk15", "genz-malik": "genz-malik"}
COMPACTIFICATIONS = ("conformal",)
# Points farther out than this contribute nothing at double precision.
FAR = 1e30

# x1..x4 are orthonormal for the split metric, with det X = x1^2 + x2^2 - x3^2 - x4^2.
_SPLIT_FROM_NULL = np.array([
    [1.0, 0.0, 0.0, -1.0],   # x11 = x1 - x4
    [0.0, -1.0, 1.0, 0.0],   # x12 = x3 - x2
    [0.0, 1.0, 1.0, 0.0],    # x21 = x2 + x3
    [1.0, 0.0, 0.0, 1.0],    # x22 = x1 + x4
])
_SPLIT_JACOBIAN = 4.0


@dataclass(frozen=True)
class ChargeConfig:
    """Quadrature settings for :func:`topological_charge`.

    ``resolution`` bounds the work: the cubature may perform at most
    ``resolution`` subdivisions of the compactified box.  One Gauss-Kronrod
    product cell already resolves the smooth conformal integrands, so the
    budget mainly caps the time spent before reporting non-convergence.
    """

    scheme: str = "gauss-kronrod"
    compactification: str = "conformal"
    resolution: int = 16
    tolerance: float = 1e-5

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}; choose from {sorted(SCHEMES)}")
        if self.compactification not in COMPACTIFICATIONS:
            raise ValueError(f"unknown compactification {self.compactification!r}")
        if self.resolution < 8:
            raise ValueError("resolution must be at least 8")
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")


def _split_conformal(q):
    """Box ``[0, pi] x [0, 1] x [0, 2 pi]^2`` onto the split chart.

    Polar coordinates in the positive and negative planes, with radii
    ``r = sin t1 / (cos t1 + cos t2)`` and ``s = sin t2 / (cos t1 + cos t2)``.
    This is the conformal compactification, so densities of finite-action
    fields stay bounded on the box.
    """
    t1 = q[:, 0]
    t2 = (np.pi - t1) * q[:, 1]
    den = np.cos(t1) + np.cos(t2)
    r = np.sin(t1) / den
    s = np.sin(t2) / den
    y = np.stack([r * np.cos(q[:, 2]), r * np.sin(q[:, 2]),
                  s * np.cos(q[:, 3]), s * np.sin(q[:, 3])], axis=-1)
    jac = _SPLIT_JACOBIAN * np.sin(t1) * np.sin(t2) / den**4 * (np.pi - t1)
    return y @ _SPLIT_FROM_NULL.T, jac


_SPLIT_BOX = ([0.0, 0.0, 0.0, 0.0], [np.pi, 1.0, 2 * np.pi, 2 * np.pi])


def _euclidean_conformal(q):
    """Stereographic coordinates: ``|x| = tan(psi / 2)`` over hyperspherical angles."""
    psi, chi, theta, phi = q.T
    rho = np.tan(psi / 2)
    w = np.stack([np.cos(chi), np.sin(chi) * np.cos(theta),
                  np.sin(chi) * np.sin(theta) * np.cos(phi),
                  np.sin(chi) * np.sin(theta) * np.sin(phi)], axis=-1)
    jac = rho**3 * 0.5 / np.cos(psi / 2) ** 2 * np.sin(chi) ** 2 * np.sin(theta)
    return rho[:, None] * w, jac


_EUCLIDEAN_BOX = ([0.0, 0.0, 0.0, 0.0], [np.pi, np.pi, np.pi, 2 * np.pi])


def _chart(signature: str, compactification: str):
    if signature == "split":
        return _split_conformal, _SPLIT_BOX
    return _euclidean_conformal, _EUCLIDEAN_BOX


def integrate_density(density, signature: str = "split", cfg: ChargeConfig | None = None) -> tuple[float, float]:
    """Integral of a scalar density over the whole chart; returns ``(value, error)``.

    Raises :class:`ChargeAccuracyError` when the budget is exhausted before
    the error estimate drops below ``cfg.tolerance``.
    """
    cfg = cfg or ChargeConfig()
    to_x, (lo, hi) = _chart(signature, cfg.compactification)

    def integrand(q):
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            x, jac = to_x(q)
            # Nodes near the box boundary map to (numerically) infinite points,
            # where finite-action densities vanish; they are not evaluated.
            ok = np.all(np.isfinite(x), axis=-1) & np.isfinite(jac) & (np.linalg.norm(x, axis=-1) < FAR)
            val = np.zeros(np.shape(jac))
            val[ok] = np.asarray(density(x[ok])) * jac[ok]
        return np.where(np.isfinite(val), val, 0.0)

    res = integrate.cubature(integrand, lo, hi, rule=SCHEMES[cfg.scheme], atol=cfg.tolerance,
                             rtol=0.0, max_subdivisions=cfg.resolution)
    value, error = float(res.estimate), float(res.error)
    if res.status != "converged":
        raise ChargeAccuracyError(
            f"charge quadrature did not converge (estimate {value:.8g}, error {error:.2g})", value, error)
    return value, error


def topological_charge(A: GaugeField, cfg: ChargeConfig | None = None) -> float:
    """``-1/(8 pi^2)`` times the integral of ``tr(F ^ F)`` over the chart.

    Split fields integrate the coefficient of ``dV`` against Lebesgue measure;
    Euclidean fields integrate the coefficient of ``dx1 ^ dx2 ^ dx3 ^ dx4``.
    """
    if A.curvature is None and A.density is None:
        raise ValueError("topological_charge needs a closed-form curvature or density")
    cfg = cfg or ChargeConfig()
    scale = -1.0 / (8.0 * np.pi**2)
    scaled = ChargeConfig(cfg.scheme, cfg.compactification, cfg.resolution, cfg.tolerance / abs(scale))
    try:
        value, _ = integrate_density(A.charge_density, A.signature, scaled)
    except ChargeAccuracyError as exc:
        partial, error = scale * exc.partial, abs(scale) * exc.error
        raise ChargeAccuracyError(
            f"charge quadrature did not converge (charge {partial:.8g}, error {error:.2g})", partial, error) from None
    return scale * value


@dataclass(frozen=True)
class ChainStage:
    name: str
    value: float


def _basic_density(x):
    x11, x12, x21, x22 = np.moveaxis(x, -1, 0)
    det = x11 * x22 - x12 * x21
    return 1.0 / (1.0 + np.sum(x**2, axis=-1) + det**2) ** 2


def _antiderivative(z):
    root = np.sqrt(1.0 + 2.0 * z)
    return -1.0 / (z + 1.0) - np.arctan(z / root) / root


def _ridge_split_2d(f, tol, power=1):
    """``int_0^inf int_0^inf f(a, b) db da`` with the inner integral split at ``b = a``.

    The integrands below concentrate along the diagonal, which plain nested
    quadrature over the quadrant resolves poorly.  The outer variable is
    ``a = u ** power`` so that slowly decaying tails become square-integrable
    after QUADPACK's own map of the half-line.
    """
    opts = dict(epsabs=tol, epsrel=tol, limit=200)
    inner_opts = dict(epsabs=0.0, epsrel=tol, limit=200)

    def inner(a):
        # distance from the ridge in units of its width ~ sqrt(1 + a)
        w = np.sqrt(1.0 + a)
        below = integrate.quad(lambda v: f(a, a - w * v), 0.0, a / w, **inner_opts)[0]
        above = integrate.quad(lambda v: f(a, a + w * v), 0.0, np.inf, **inner_opts)[0]
        return w * (below + above)

    def outer(u):
        return inner(u**power) * power * u ** (power - 1)

    return integrate.quad(outer, 0.0, np.inf, **opts)[0]


def charge_reduction_chain(tol: float = 1e-10) -> list[ChainStage]:
    """Each successive integral in the reduction of the basic charge to one dimension.

    Every stage is evaluated by its own quadrature; all should equal 1.
    """
    inf = np.inf
    stages = []
    value, _ = integrate_density(_basic_density, "split", ChargeConfig(tolerance=1e-9))
    stages.append(ChainStage("4d: (1/2pi^2) int d^4X / det(1+XX^t)^2", value / (2 * np.pi**2)))

    polar = _ridge_split_2d(lambda r, s: r * s / (1 + 2 * (r * r + s * s) + (r * r - s * s) ** 2) ** 2, tol)
    stages.append(ChainStage("polar: 8 int int rs/(1+2(r^2+s^2)+(r^2-s^2)^2)^2", 8 * polar))

    squares = _ridge_split_2d(lambda x, y: 1.0 / (1 + 2 * (x + y) + (x - y) ** 2) ** 2, tol, power=2)
    stages.append(ChainStage("squares: 2 int int dxdy/(1+2(x+y)+(x-y)^2)^2", 2 * squares))

    rotated = integrate.dblquad(
        lambda w, z: 1.0 / (1 + 2 * z + w * w) ** 2, 0, inf, lambda z: -z, lambda z: z,
        epsabs=tol, epsrel=tol)[0]
    stages.append(ChainStage("rotated: int_0^inf int_-z^z dw/(1+2z+w^2)^2 dz", rotated))

    def one_d(z):
        root = np.sqrt(1 + 2 * z)
        return z / ((1 + 2 * z) * (z + 1) ** 2) + np.arctan(z / root) / root**3

    stages.append(ChainStage("1d: int_0^inf [...] dz", integrate.quad(one_d, 0, inf, epsabs=tol, epsrel=tol, limit=200)[0]))
    # the antiderivative tends to 0 at infinity
    stages.append(ChainStage("antiderivative: lim - F(0)", 0.0 - float(_antiderivative(0.0))))
    return stages


def euclidean_radial_charge(corrected: bool = True) -> float:
    """``-12 int_0^inf r^3 w(r) dr`` with ``w = (1+r^2)^-4``.

    With ``corrected=False`` the weight is the variant ``(1+r^4)^-2``, whose
    value is -3 rather than -1.
    """
    if corrected:
        w = lambda r: r**3 / (1 + r * r) ** 4
    else:
        w = lambda r: r**3 / (1 + r**4) ** 2
    return -12.0 * integrate.quad(w, 0, np.inf, epsabs=1e-13, epsrel=1e-13)[0]
