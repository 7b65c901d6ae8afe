"""Split and complex ADHM data: scans, cokernel frames and induced connections.

Data ``(A, B)`` are real (or complex) ``2(n+k) x 2k`` matrices.  At a point
``[X : Y]`` of the quaternionic projective line the pencil is
``v = A (I_k (x) X) + B (I_k (x) Y)``.  On the chart ``Y = I`` this is
``v(X) = A (I_k (x) X) + B``, and the bundle ``E`` is the orthogonal complement
of the columns of ``v``.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np
from scipy import optimize
from scipy.stats import norm, qmc

from . import forms, quat
from .connection import GaugeField, curvature_from_derivative, derivative_fd, sdym_residual
from .errors import DegenerateDataError, DomainError

DEFAULT_SAMPLES = 4096
RANK_THRESHOLD = 1e-8


@dataclass(frozen=True)
class ADHMSystem:
    n: int
    k: int
    A: np.ndarray
    B: np.ndarray

    def __post_init__(self):
        dtype = complex if np.iscomplexobj(self.A) or np.iscomplexobj(self.B) else float
        A = np.asarray(self.A, dtype=dtype)
        B = np.asarray(self.B, dtype=dtype)
        shape = (2 * (self.n + self.k), 2 * self.k)
        if self.n < 1 or self.k < 1:
            raise DomainError("n and k must be positive")
        if A.shape != shape or B.shape != shape:
            raise DomainError(f"A and B must have shape {shape}, got {A.shape} and {B.shape}")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)

    @property
    def size(self) -> int:
        return 2 * (self.n + self.k)

    @property
    def is_complex(self) -> bool:
        return np.iscomplexobj(self.A)

    def blocks(self, X) -> np.ndarray:
        """``I_k (x) X`` for a batch of 2x2 matrices."""
        X = np.asarray(X)
        out = np.zeros(X.shape[:-2] + (2 * self.k, 2 * self.k), dtype=np.result_type(X, float))
        for j in range(self.k):
            out[..., 2 * j:2 * j + 2, 2 * j:2 * j + 2] = X
        return out

    def pencil(self, X, Y) -> np.ndarray:
        return self.A @ self.blocks(X) + self.B @ self.blocks(Y)

    def v(self, X) -> np.ndarray:
        """``A (I_k (x) X) + B`` on the chart ``Y = I``."""
        return self.A @ self.blocks(X) + self.B

    def dv(self) -> np.ndarray:
        """Components ``A (I_k (x) E_m)`` of ``dv`` along ``dx11, dx12, dx21, dx22``."""
        return np.stack([self.A @ self.blocks(quat.BASIS[m]) for m in range(4)])


def ComplexADHMSystem(n: int, k: int, A, B) -> ADHMSystem:
    """An :class:`ADHMSystem` with complex entries and Hermitian inner product."""
    return ADHMSystem(n, k, np.asarray(A, dtype=complex), np.asarray(B, dtype=complex))


def universal_datum(n: int = 1, complex_: bool = False) -> ADHMSystem:
    """``A = [I; 0]``, ``B = [0; I]`` with ``k = n``: the tautological plane ``[X; I]``.

    For ``n > 1`` this is the direct sum of ``n`` copies of the ``n = 1`` datum.
    """
    A = np.zeros((4 * n, 2 * n))
    B = np.zeros((4 * n, 2 * n))
    for j in range(n):
        A[4 * j:4 * j + 2, 2 * j:2 * j + 2] = np.eye(2)
        B[4 * j + 2:4 * j + 4, 2 * j:2 * j + 2] = np.eye(2)
    return ComplexADHMSystem(n, n, A, B) if complex_ else ADHMSystem(n, n, A, B)


def direct_sum(s1: ADHMSystem, s2: ADHMSystem) -> ADHMSystem:
    """Block-diagonal sum; ``n`` and ``k`` add."""
    def bd(a, b):
        out = np.zeros((a.shape[0] + b.shape[0], a.shape[1] + b.shape[1]), dtype=np.result_type(a, b))
        out[:a.shape[0], :a.shape[1]] = a
        out[a.shape[0]:, a.shape[1]:] = b
        return out

    return ADHMSystem(s1.n + s2.n, s1.k + s2.k, bd(s1.A, s2.A), bd(s1.B, s2.B))


# ---------------------------------------------------------------- file format

def load_system(path) -> ADHMSystem:
    """Read ``n k`` then the rows of ``A`` then the rows of ``B`` (whitespace separated)."""
    lines = [ln.split("#", 1)[0].strip() for ln in Path(path).read_text().splitlines()]
    lines = [ln for ln in lines if ln]
    if not lines:
        raise ValueError("empty ADHM file")
    header = lines[0].split()
    if len(header) != 2:
        raise ValueError("header must be 'n k'")
    n, k = int(header[0]), int(header[1])
    rows = 2 * (n + k)
    body = [[float(t) for t in ln.split()] for ln in lines[1:]]
    if len(body) != 2 * rows or any(len(r) != 2 * k for r in body):
        raise ValueError(f"expected {2 * rows} rows of {2 * k} numbers after the header")
    data = np.array(body)
    return ADHMSystem(n, k, data[:rows], data[rows:])


def save_system(s: ADHMSystem, path) -> None:
    lines = [f"{s.n} {s.k}"]
    for M in (s.A, s.B):
        lines += [" ".join(repr(float(v)) for v in row) for row in np.real(M)]
    Path(path).write_text("\n".join(lines) + "\n")


# ---------------------------------------------------------------- scans

@dataclass(frozen=True)
class ScanResult:
    passed: bool
    value: float
    witness: Optional[np.ndarray]


def _sobol(d: int, n: int, seed: int) -> np.ndarray:
    m = int(np.ceil(np.log2(max(n, 2))))
    return qmc.Sobol(d, scramble=True, seed=seed).random_base2(m)[:n]


def projective_samples(samples: int, seed: int = 0) -> np.ndarray:
    """Orthonormal ``[X; Y]`` representatives ``(samples, 4, 2)`` covering the projective line.

    Half come from Gaussian 4x2 matrices, a quarter from each affine chart
    with entries ``tan(u)``, which piles points up near the charts' boundary.
    """
    n_gauss = samples - 2 * (samples // 4)
    n_chart = samples // 4
    pts = []
    u = np.clip(_sobol(8, n_gauss, seed), 1e-12, 1 - 1e-12)
    pts.append(norm.ppf(u).reshape(-1, 4, 2))
    for chart in range(2):
        if n_chart == 0:
            continue
        w = np.tan(np.pi * (_sobol(4, n_chart, seed + 1 + chart) - 0.5) * 0.999)
        W = w.reshape(-1, 2, 2)
        eye = np.broadcast_to(np.eye(2), W.shape)
        pts.append(np.concatenate([W, eye] if chart == 0 else [eye, W], axis=-2))
    reps = np.concatenate(pts)
    q, _ = np.linalg.qr(reps)
    return q


def _sigma_min(s: ADHMSystem, reps) -> np.ndarray:
    v = s.pencil(reps[..., :2, :], reps[..., 2:, :])
    return np.linalg.svd(v, compute_uv=False)[..., -1]


def nondegeneracy_scan(s: ADHMSystem, samples: int = DEFAULT_SAMPLES, seed: int = 0,
                       refine: int = 4) -> ScanResult:
    """Smallest singular value of the pencil over the projective line.

    Sampling is followed by local minimization from the ``refine`` worst
    samples.  Passing is a numerical verdict, not a certificate.
    """
    if samples < 1:
        raise ValueError("samples must be positive")
    reps = projective_samples(samples, seed)
    sig = _sigma_min(s, reps)
    order = np.argsort(sig)
    best_val, best_rep = float(sig[order[0]]), reps[order[0]]

    def objective(z):
        q, _ = np.linalg.qr(z.reshape(4, 2))
        return float(_sigma_min(s, q))

    for idx in order[:refine]:
        res = optimize.minimize(objective, reps[idx].ravel(), method="Nelder-Mead",
                                options=dict(xatol=1e-12, fatol=1e-14, maxiter=4000))
        if res.fun < best_val:
            best_val = float(res.fun)
            best_rep, _ = np.linalg.qr(res.x.reshape(4, 2))
    scale = max(float(np.max(np.abs(s.A), initial=0.0)), float(np.max(np.abs(s.B), initial=0.0)))
    passed = scale > 0 and best_val > RANK_THRESHOLD * scale
    return ScanResult(bool(passed), best_val, best_rep)


def chart_samples(samples: int, seed: int = 0, spread: float = 1.0) -> np.ndarray:
    """Points ``X`` (as coordinates ``(samples, 4)``) on the chart ``Y = I``."""
    u = np.clip(_sobol(4, samples, seed), 1e-12, 1 - 1e-12)
    return spread * norm.ppf(u)


def _gram_inverse(s: ADHMSystem, v):
    G = np.conj(np.swapaxes(v, -1, -2)) @ v
    sv = np.linalg.svd(v, compute_uv=False)[..., -1]
    scale = max(1.0, float(np.max(np.abs(v))))
    if np.any(sv <= RANK_THRESHOLD * scale):
        raise DegenerateDataError("pencil is not of maximal rank at an evaluated point")
    return np.linalg.inv(G)


def split_reality_residual(s: ADHMSystem, x) -> np.ndarray:
    """Relative asymmetry of the 2x2 blocks of ``(v^t v)^-1`` at chart points ``x``."""
    Gi = _gram_inverse(s, s.v(quat.from_coords(np.asarray(x, dtype=float))))
    blocks = Gi.reshape(Gi.shape[:-2] + (s.k, 2, s.k, 2))
    asym = np.abs(blocks - np.swapaxes(blocks, -1, -3))
    return np.max(asym, axis=(-4, -3, -2, -1)) / np.max(np.abs(Gi), axis=(-2, -1))


def split_reality_scan(s: ADHMSystem, samples: int = DEFAULT_SAMPLES, seed: int = 0,
                       tol: float = 1e-12) -> ScanResult:
    """Split reality of ``(v^t v)^-1`` (each 2x2 block symmetric) on the chart ``Y = I``."""
    x = chart_samples(samples, seed)
    try:
        r = split_reality_residual(s, x)
    except DegenerateDataError:
        r = np.array([split_reality_residual_or_inf(s, xi) for xi in x])
    i = int(np.argmax(r))
    return ScanResult(bool(r[i] <= tol), float(r[i]), x[i])


def split_reality_residual_or_inf(s: ADHMSystem, x) -> float:
    try:
        return float(split_reality_residual(s, x))
    except DegenerateDataError:
        return np.inf


# ---------------------------------------------------------------- frames and curvature

@dataclass(frozen=True)
class FramePair:
    v: np.ndarray
    u: np.ndarray


def reference_complement(s: ADHMSystem, x_ref=None) -> np.ndarray:
    """Orthonormal basis of the complement of ``col v`` at a reference point (default ``X = 0``)."""
    x_ref = np.zeros(4) if x_ref is None else np.asarray(x_ref, dtype=float)
    v = s.v(quat.from_coords(x_ref))
    _gram_inverse(s, v)
    U, _, _ = np.linalg.svd(v, full_matrices=True)
    return U[:, 2 * s.k:]


def _projector(s: ADHMSystem, v):
    Gi = _gram_inverse(s, v)
    vh = np.conj(np.swapaxes(v, -1, -2))
    return np.eye(s.size) - v @ Gi @ vh, Gi


def cokernel_frame(s: ADHMSystem, X, U0=None, orthonormal: bool = True) -> FramePair:
    """``v = A (I (x) X) + B`` and a frame ``u`` of its orthogonal complement.

    ``u`` is the projection ``P U0`` of a reference basis, made orthonormal by
    the symmetric factor ``(U0^* P U0)^(-1/2)``; this is smooth in ``X`` and
    agrees with ``U0`` at the reference point.
    """
    v = s.v(np.asarray(X))
    U0 = reference_complement(s) if U0 is None else np.asarray(U0)
    P, _ = _projector(s, v)
    u = P @ U0
    if orthonormal:
        N = np.conj(U0.T) @ u
        w, V = np.linalg.eigh(N)
        if np.min(w) <= 1e-10:
            raise DegenerateDataError("reference frame is orthogonal to the fibre here")
        u = u @ (V * w[..., None, :] ** -0.5) @ np.conj(np.swapaxes(V, -1, -2))
    return FramePair(v=v, u=u)


def _wedge_dv(dv, Gi):
    """``dv ^ Gi dv^*`` on the pair basis; ``dv`` is ``(m, N, 2k)``."""
    ks, ls = np.triu_indices(dv.shape[-3], 1)
    dvh = np.conj(np.swapaxes(dv, -1, -2))
    Gi = Gi[..., None, :, :]
    return dv[ks] @ Gi @ dvh[ls] - dv[ls] @ Gi @ dvh[ks]


def induced_curvature(s: ADHMSystem, X, u=None) -> np.ndarray:
    """``F = (u^* u)^-1 u^* (dv ^ (v^* v)^-1 dv^*) u`` at ``X`` (batched), shape ``(..., 6, 2n, 2n)``.

    Without ``u`` the frame of :func:`cokernel_frame` is used.
    """
    X = np.asarray(X)
    v = s.v(X)
    Gi = _gram_inverse(s, v)
    if u is None:
        u = cokernel_frame(s, X).u
    uh = np.conj(np.swapaxes(u, -1, -2))
    Om = _wedge_dv(s.dv(), Gi)
    return (np.linalg.inv(uh @ u) @ uh)[..., None, :, :] @ Om @ u[..., None, :, :]


def charge_density(s: ADHMSystem, x) -> np.ndarray:
    """Volume coefficient of ``tr(F ^ F) = tr(P Om ^ P Om)``, independent of the frame."""
    v = s.v(quat.from_coords(np.asarray(x, dtype=float)))
    P, Gi = _projector(s, v)
    POm = P[..., None, :, :] @ _wedge_dv(s.dv(), Gi)
    return np.real(forms.trace_wedge22(POm, POm))


def induced_field(s: ADHMSystem, U0=None) -> GaugeField:
    """Connection ``(u^t u)^-1 u^t du`` in the frame ``u = P U0``, with closed-form curvature.

    With ``u = P U0`` one has ``u^t du = -U0^t P dv G^-1 v^t U0``, so no
    derivative of the frame is needed.
    """
    if s.is_complex:
        raise DomainError("use complex_induced_potential for complex data")
    U0 = reference_complement(s) if U0 is None else np.asarray(U0)
    dv = s.dv()

    def pieces(x):
        v = s.v(quat.from_coords(np.asarray(x, dtype=float)))
        P, Gi = _projector(s, v)
        return v, P, Gi

    def potential(x):
        v, P, Gi = pieces(x)
        Ni = np.linalg.inv(U0.T @ P @ U0)
        right = (Gi @ np.swapaxes(v, -1, -2) @ U0)[..., None, :, :]
        left = (Ni @ U0.T @ P)[..., None, :, :]
        return -left @ dv @ right

    def curvature(x):
        v, P, Gi = pieces(x)
        u = P @ U0
        return induced_curvature(s, quat.from_coords(np.asarray(x, dtype=float)), u)

    return GaugeField(potential, curvature, density=lambda x: charge_density(s, x), name="ADHM")


def sd_iff_split_real_check(s: ADHMSystem, samples: int = 64, seed: int = 0) -> dict:
    """Paired per-sample SD residual and split-reality residual on the chart ``Y = I``.

    Both are made relative to the size of their inputs so that they are
    comparable across points.
    """
    x = chart_samples(samples, seed)
    X = quat.from_coords(x)
    F = induced_curvature(s, X)
    scale = np.max(np.abs(F), axis=(-3, -2, -1))
    sd = np.asarray(sdym_residual(F)) / np.maximum(scale, 1e-300)
    sr = split_reality_residual(s, x)
    return {"points": x, "sd_residual": sd, "split_residual": sr}


# ---------------------------------------------------------------- complex data

def complex_point(x8) -> np.ndarray:
    """Real coordinates ``(x11, x12, x21, x22, y11, y12, y21, y22)`` to a complex 2x2 matrix."""
    x8 = np.asarray(x8, dtype=float)
    return quat.from_coords(x8[..., :4] + 1j * x8[..., 4:])


def complex_induced_field(s: ADHMSystem, U0=None) -> GaugeField:
    """Hermitian projection connection over the 8 real coordinates of ``Z``."""
    U0 = reference_complement(s) if U0 is None else np.asarray(U0)
    dv_hol = s.dv()
    dv = np.concatenate([dv_hol, 1j * dv_hol])  # d/dx_p, then d/dy_p
    U0h = np.conj(U0.T)

    def potential(x8):
        v = s.v(complex_point(x8))
        P, Gi = _projector(s, v)
        Ni = np.linalg.inv(U0h @ P @ U0)
        right = (Gi @ np.conj(np.swapaxes(v, -1, -2)) @ U0)[..., None, :, :]
        left = (Ni @ U0h @ P)[..., None, :, :]
        return -left @ dv @ right

    return GaugeField(potential, dim=8, signature="complex", name="complex ADHM")


def holomorphic_parts(F8) -> tuple[np.ndarray, np.ndarray]:
    """``(2,0)`` and ``(0,2)`` components of a 2-form in the 8 real coordinates.

    ``F8`` lists ``F(e_a, e_b)`` for ``a < b`` with ``e = (dx_p, dy_p)``.
    Returns arrays ``[..., p, q, :, :]`` of ``F(d_z_p, d_z_q)`` and
    ``F(d_zbar_p, d_zbar_q)``.
    """
    ks, ls = np.triu_indices(8, 1)
    full = np.zeros(F8.shape[:-3] + (8, 8) + F8.shape[-2:], dtype=complex)
    full[..., ks, ls, :, :] = F8
    full[..., ls, ks, :, :] = -F8
    xx = full[..., :4, :4, :, :]
    xy = full[..., :4, 4:, :, :]
    yx = full[..., 4:, :4, :, :]
    yy = full[..., 4:, 4:, :, :]
    f20 = 0.25 * (xx - 1j * xy - 1j * yx - yy)
    f02 = 0.25 * (xx + 1j * xy + 1j * yx - yy)
    return f20, f02


def complex_adhm_type11_check(s: ADHMSystem, samples: int = 16, seed: int = 0,
                              spread: float = 0.7, h: float = 1e-4) -> float:
    """Max norm of the ``(2,0)`` and ``(0,2)`` parts of the FD curvature at sampled ``Z``."""
    A = complex_induced_field(s)
    x8 = spread * norm.ppf(np.clip(_sobol(8, samples, seed), 1e-12, 1 - 1e-12))
    dA = derivative_fd(A.potential, x8, h)
    F8 = curvature_from_derivative(A.potential(x8), dA)
    f20, f02 = holomorphic_parts(F8)
    return float(max(np.max(np.abs(f20)), np.max(np.abs(f02))))


def random_system(rng: np.random.Generator, n: int, k: int, complex_: bool = False) -> ADHMSystem:
    shape = (2 * (n + k), 2 * k)
    A = rng.normal(size=shape)
    B = rng.normal(size=shape)
    if complex_:
        A = A + 1j * rng.normal(size=shape)
        B = B + 1j * rng.normal(size=shape)
    return ADHMSystem(n, k, A, B)
