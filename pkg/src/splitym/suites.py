"""Verification suites behind ``splitym verify``.

Each suite appends records to a :class:`report.Recorder`.  Checks draw their
random inputs from the recorder's per-check stream, so reports depend only
on the seed and the configuration.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from . import adhm, charge, connection as conn, forms, grassmann as gr, quat, solutions as sol, thooft
from .report import Recorder, RunConfig

EUCLIDEAN_NOTE = ("weight (1+r^2)^-4 used; the variant (1+r^4)^-2 gives -3 and is treated as a misprint")


def _max(values) -> float:
    return float(np.max(np.abs(np.asarray(values)), initial=0.0))


def _random_mats(rng, n, complex_=False):
    M = rng.normal(size=(n, 2, 2))
    return M + 1j * rng.normal(size=(n, 2, 2)) if complex_ else M


def _upper_triangular_g(rng) -> sol.ConformalElement:
    a = rng.normal(size=(2, 2)) + 2 * np.eye(2)
    d = rng.normal(size=(2, 2)) + 2 * np.eye(2)
    b = rng.normal(size=(2, 2))
    g = np.block([[a, b], [np.zeros((2, 2)), d]])
    g[:, 0] /= np.linalg.det(g)
    return sol.ConformalElement(g)


def well_conditioned_transition(rng, X, floor=0.5, scale=0.5):
    """A random transition with ``|det pi(X)| >= floor`` at ``X``."""
    while True:
        t = gr.Transition.between(gr.random_sl4(rng, scale), gr.random_sl4(rng, scale))
        if abs(t.det_pi(X)) >= floor:
            return t


# ---------------------------------------------------------------- algebra

def verify_algebra(rec: Recorder) -> None:
    n = rec.cfg.points

    def mult_rules(rng):
        Z, W = _random_mats(rng, n, True), _random_mats(rng, n, True)
        return max(_max(quat.transpose(Z @ W) - quat.transpose(W) @ quat.transpose(Z)),
                   _max(Z @ quat.tilde(Z) - quat.det(Z)[:, None, None] * quat.I2),
                   _max(quat.det(Z @ W) - quat.det(Z) * quat.det(W)))

    rec.below("multiplication rules (transpose, adjugate, det)", mult_rules, 1e-12)

    def lemma22(rng):
        a, b = rng.normal(size=(2, n)) + 1j * rng.normal(size=(2, n))
        H = np.stack([np.stack([a, -np.conj(b)], -1), np.stack([b, np.conj(a)], -1)], -2)
        R = rng.normal(size=(n, 2, 2))
        return all(quat.is_euclidean(h) for h in H) and all(quat.is_split(r) for r in R) \
            and not any(quat.is_split(c) for c in _random_mats(rng, n, True))

    rec.truth("quaternion and split predicates", lemma22)

    def spd(rng):
        M = rng.normal(size=(n, 2, 2))
        M = M @ quat.transpose(M) + 0.1 * quat.I2
        S = quat.spd_sqrt(M)
        return _max(S @ S - M) / _max(M)

    rec.below("spd_sqrt squares back", spd, 1e-12)

    def lemma_matrix(rng):
        worst = 0.0
        for _ in range(1000):
            a = rng.normal(size=(2, 2))
            b = rng.normal(size=(2, 2))
            if abs(np.linalg.det(b)) < 0.1:
                continue
            worst = max(worst, quat.matrix_identity_check(a, b))
        return worst

    rec.below("matrix lemma on 1000 random pairs", lemma_matrix, 1e-10)


# ---------------------------------------------------------------- forms

def verify_forms(rec: Recorder) -> None:
    eye6 = np.eye(6)
    rec.below("hodge star is an involution", lambda rng: _max(forms.HODGE @ forms.HODGE - eye6), 0.0)
    rec.below("hodge star is self-adjoint for the wedge pairing",
              lambda rng: _max(forms.VOLUME_PAIRING @ forms.HODGE - (forms.VOLUME_PAIRING @ forms.HODGE).T), 0.0)

    def lemma_agree(rng):
        bad = 0
        for variant in "abcd":
            for _ in range(250):
                choice = rng.integers(3)
                A = rng.normal(size=(2, 2))
                if choice == 0:
                    A = A + A.T
                elif choice == 1:
                    A = rng.normal() * np.eye(2)
                bad += forms.duality_predicate(variant, A) != forms.duality_criterion(variant, A)
        return bad

    rec.below("lemma predicates agree with algebraic criteria (1000 matrices)", lemma_agree, 0.0)
    rec.close("det F of the basic instanton at 0 (dV coefficient)",
              lambda rng: forms.det2form(sol.basic_split_instanton().F(np.zeros(4))), 2.0, 1e-14)
    rec.close("Euclidean volume factor dV / dx1234", lambda rng: forms.euclidean_volume_factor().real, -4.0, 1e-14)


# ---------------------------------------------------------------- solutions

def _fd_vs_closed(field: conn.GaugeField, fd_step: float, n: int, spread: float = 1.0) -> Callable:
    def run(rng):
        x = spread * rng.normal(size=(n, 4))
        return _max(conn.curvature_fd(field, x, fd_step) - field.curvature(x))

    return run


def verify_solutions(rec: Recorder) -> None:
    cfg = rec.cfg
    n = cfg.points
    inst, anti = sol.basic_split_instanton(), sol.basic_split_anti_instanton()
    eucl = sol.euclidean_basic_instanton()
    for field in (inst, anti, eucl):
        rec.below(f"FD vs closed curvature: {field.name}", _fd_vs_closed(field, cfg.fd_step, n), 1e-7)

    rec.below("FD vs closed curvature: A_g (upper-triangular g)",
              lambda rng: _fd_vs_closed(sol.conformal_pullback(_upper_triangular_g(rng)), cfg.fd_step, n)(rng), 1e-7)
    rec.below("sdym residual, basic instanton", lambda rng: _max(conn.sdym_residual(inst.F(rng.normal(size=(1000, 4))))), 1e-12)
    rec.below("asdym residual, basic anti-instanton",
              lambda rng: _max(conn.asdym_residual(anti.F(rng.normal(size=(1000, 4))))), 1e-12)
    rec.below("Euclidean SD residual (FD curvature)",
              lambda rng: _max(conn.euclidean_sd_residual(conn.curvature_fd(eucl, rng.normal(size=(n, 4)), cfg.fd_step))), 1e-8)

    def ag_asd(rng):
        A = sol.conformal_pullback(_upper_triangular_g(rng))
        return _max(conn.asdym_residual(A.F(rng.normal(size=(n, 4)))))

    rec.below("asdym residual of A_g", ag_asd, 1e-8)

    def o2(rng):
        x = rng.normal(size=(n, 4))
        A = conn.gauge_apply(sol.o2_gauge, inst, h=cfg.fd_step).potential(x)
        return _max(A + quat.transpose(A))

    rec.below("O(2) gauge makes the instanton antisymmetric", o2, 1e-8)
    rec.below("unified connection restricts to the split anti-instanton",
              lambda rng: sol.restriction_check("split", rng.normal(size=(n, 4))), 1e-12)
    rec.below("unified connection restricts to the Euclidean instanton",
              lambda rng: sol.restriction_check("euclidean", rng.normal(size=(n, 4))), 1e-12)

    qcfg = charge.ChargeConfig(tolerance=cfg.quad_tol)
    rec.close("charge: basic split instanton", lambda rng: charge.topological_charge(inst, qcfg), 1.0, 1e-3)
    rec.close("charge: basic split anti-instanton", lambda rng: charge.topological_charge(anti, qcfg), -1.0, 1e-3)
    rec.close("charge: Euclidean instanton (radial)", lambda rng: charge.euclidean_radial_charge(), -1.0, 1e-6,
              note=EUCLIDEAN_NOTE)
    rec.close("Euclidean radial variant (1+r^4)^-2", lambda rng: charge.euclidean_radial_charge(False), -3.0, 1e-6,
              note="documents the misprinted weight")
    stages = charge.charge_reduction_chain()
    for st in stages:
        rec.close(f"charge chain: {st.name}", lambda rng, v=st.value: v, 1.0, 1e-6 if st.name.startswith("1d") else 1e-3)

    rec.close("scale of the identity element", lambda rng: sol.center_scale(np.eye(4)).scale, 2.0, 1e-14)
    rec.below("center of the identity element", lambda rng: _max(sol.center_scale(np.eye(4)).center), 0.0)

    def argmax_err(rng):
        worst = 0.0
        for _ in range(10):
            g = _upper_triangular_g(rng)
            c = sol.center_scale(g).center.reshape(4)
            # The window is shifted by whole steps so -a^-1 b is a grid node but
            # not the middle one.  Off-node peaks of an anisotropic |det F_g|
            # can legitimately put the discrete argmax several steps away.
            off = rng.integers(-3, 4, size=4) * 0.2
            p, step = sol.grid_argmax(g, c - 1 + off, c + 1 + off, 11)
            worst = max(worst, float(np.max(np.abs(p - c) / step)))
        return worst

    rec.below("grid argmax of |det F_g| vs -a^-1 b (in grid steps)", argmax_err, 1.0)

    def so4(rng):
        R = sol.block_rotation(*rng.uniform(0, 2 * np.pi, 2))
        return sol.so4_invariance_check(R, rng.normal(size=(n, 4)))

    rec.below("block rotations leave det F invariant", so4, 1e-8)
    rec.above("non-orthogonal element moves det F",
              lambda rng: sol.invariant_field_deviation(np.diag([2.0, 0.5, 1.0, 1.0]), rng.normal(size=(n, 4))), 1e-2)


# ---------------------------------------------------------------- grassmann

def _over_pairs(rng, n, fn, spread=0.5):
    worst = 0.0
    for _ in range(n):
        X = spread * rng.normal(size=(2, 2))
        t = well_conditioned_transition(rng, X)
        worst = max(worst, fn(t, X, rng))
    return worst


def verify_grassmann(rec: Recorder) -> None:
    n = rec.cfg.points

    def cocycles(rng):
        worst = 0.0
        for _ in range(n):
            g, h, l = (gr.random_sl4(rng) for _ in range(3))
            X = 0.5 * rng.normal(size=(2, 2))
            worst = max(worst, gr.transition_cocycle_residual(g, h, l, X), gr.pi_cocycle_residual(g, h, l, X))
        return worst

    rec.below("transition and pi cocycles", cocycles, 1e-10)
    rec.below("tangent map vs FD Jacobian",
              lambda rng: _over_pairs(rng, n, lambda t, X, r: gr.pullback_dX_check(t, X)), 1e-7)
    rec.below("conformal factor",
              lambda rng: _over_pairs(rng, n, lambda t, X, r: max(gr.conformal_factor_residual(t, X, r.normal(size=(2, 2))),
                                                                  gr.conformal_factor_identity_residual(t, X))), 1e-9)
    det = lambda y: quat.det(quat.from_coords(y))
    rec.below("gradient transform (f = det X)",
              lambda rng: _over_pairs(rng, n, lambda t, X, r: gr.gradient_transform_check(t, det, X)), 1e-7)

    def box_cov(t, X, r):
        lhs, rhs = gr.box22_covariance_check(t, lambda y: y[..., 0] * y[..., 3], X)
        return abs(lhs - rhs)

    rec.below("box22 covariance (f = x11 x22)", lambda rng: _over_pairs(rng, n, box_cov), 1e-4)
    rec.below("gluing identity", lambda rng: _over_pairs(rng, n, lambda t, X, r: thooft.gluing_identity_check(t, X)), 1e-8)


# ---------------------------------------------------------------- thooft

def harmonic_seeds(rng, count: int) -> list[thooft.ScalarSolution]:
    """Quadratic seeds ``c + b.x + x^t S x`` with ``box22 = 0``, positive near the origin."""
    seeds = []
    for _ in range(count):
        S = rng.normal(size=(4, 4)) * 0.3
        S = (S + S.T) / 2
        S[0, 3] = S[3, 0] = S[1, 2]
        seeds.append(thooft.quadratic_seed(5.0, rng.normal(size=4) * 0.3, S))
    return seeds


def nonharmonic_seeds(rng, count: int) -> list[thooft.ScalarSolution]:
    seeds = []
    for _ in range(count):
        S = rng.normal(size=(4, 4)) * 0.3
        S = (S + S.T) / 2
        S[0, 3] = S[3, 0] = S[1, 2] + rng.choice([-1.0, 1.0]) * rng.uniform(0.5, 1.0)
        seeds.append(thooft.quadratic_seed(5.0, rng.normal(size=4) * 0.3, S))
    return seeds


GRID = np.stack(np.meshgrid(*[np.linspace(-0.5, 0.5, 5)] * 4, indexing="ij"), -1).reshape(-1, 4)


def verify_thooft(rec: Recorder) -> None:
    cfg = rec.cfg
    n = cfg.points
    anti = sol.basic_split_anti_instanton()
    rec.below("A(f0) equals the basic anti-instanton",
              lambda rng: _max(thooft.local_ansatz(thooft.f0()).potential(x := rng.normal(size=(n, 4))) - anti.potential(x)),
              1e-9)

    def harmonic(rng):
        return max(_max(conn.asdym_residual(conn.curvature_fd(thooft.local_ansatz(f), GRID, cfg.fd_step)))
                   for f in harmonic_seeds(rng, 20))

    rec.below("ASD residual of 20 harmonic seeds on a 5^4 grid", harmonic, 1e-6)

    def nonharmonic(rng):
        pts = rng.normal(size=(10, 4)) * 0.5
        ok = 0
        for f in nonharmonic_seeds(rng, 10):
            res = conn.asdym_residual(conn.curvature_fd(thooft.local_ansatz(f), pts, cfg.fd_step))
            ok += thooft.bounded_away(res)
        return ok

    rec.close("non-harmonic seeds bounded away (count of 10)", nonharmonic, 10.0, 0.0)

    def xray_f0(rng):
        phi = thooft.inverse_square()
        x = rng.normal(size=(n, 4))
        B = np.concatenate([quat.from_coords(x), np.broadcast_to(np.eye(2), (n, 2, 2))], axis=-2)
        vals = thooft.xray_transform(phi, B)
        oracle = np.array([thooft.gram_oracle(b[:, 0], b[:, 1]) for b in B])
        return max(_max(vals - thooft.f0().func(x)), _max(oracle - thooft.f0().func(x)))

    rec.below("X-ray of 1/|x|^2 equals f0 (and the Gram oracle)", xray_f0, 1e-6)
    rec.below("box22 of the X-ray section",
              lambda rng: _max(gr.box22(thooft.xray_section(thooft.inverse_square()).func,
                                        quat.from_coords(rng.normal(size=(n, 4))))), 1e-4)

    def transform(rng):
        return _over_pairs(rng, n, lambda t, X, r: thooft.transform_check(t, thooft.f0(), X))

    rec.below("transformation law of A(f)", transform, 1e-7)

    def orbit_so4(rng):
        R = sol.block_rotation(*rng.uniform(0, 2 * np.pi, 2))
        return thooft.quadric_orbit_check(np.eye(4), R, rng.normal(size=(20, 4)))

    rec.below("quadric orbit: SO(4) stabilizes the standard quadric", orbit_so4, 1e-6)
    rec.above("quadric orbit: diag(2, 1/2, 1, 1) moves it",
              lambda rng: thooft.quadric_orbit_check(np.eye(4), np.diag([2.0, 0.5, 1.0, 1.0]), rng.normal(size=(20, 4))),
              1e-2)


# ---------------------------------------------------------------- adhm

def failing_k2(rng) -> adhm.ADHMSystem:
    return adhm.random_system(rng, 1, 2)


def verify_adhm(rec: Recorder) -> None:
    cfg = rec.cfg
    u = adhm.universal_datum()
    rec.above("universal datum: min sigma", lambda rng: adhm.nondegeneracy_scan(u, cfg.samples, cfg.seed).value, 1e-3)
    rec.truth("zero datum fails the non-degeneracy scan",
              lambda rng: not adhm.nondegeneracy_scan(adhm.ADHMSystem(1, 1, np.zeros((4, 2)), np.zeros((4, 2))),
                                                      cfg.samples, cfg.seed).passed)
    rec.below("universal datum: split reality", lambda rng: adhm.split_reality_scan(u, cfg.samples, cfg.seed).value, 1e-14)
    rec.below("universal datum: SD residual",
              lambda rng: _max(conn.sdym_residual(adhm.induced_curvature(u, quat.from_coords(rng.normal(size=(cfg.points, 4)))))),
              1e-9)
    rec.below("universal datum: FD vs closed curvature", _fd_vs_closed(adhm.induced_field(u), cfg.fd_step, cfg.points), 1e-7)
    rec.close("universal datum: charge", lambda rng: charge.topological_charge(
        adhm.induced_field(u), charge.ChargeConfig(tolerance=cfg.quad_tol)), 1.0, 1e-3)

    def cofail(rng):
        rep = adhm.sd_iff_split_real_check(failing_k2(rng), 32, cfg.seed)
        both = (np.asarray(rep["sd_residual"]) > 1e-4) & (np.asarray(rep["split_residual"]) > 1e-4)
        return float(np.sum(both))

    rec.close("random k=2 datum: samples (of 32) where SD and split residuals both exceed 1e-4", cofail, 32.0, 0.0)
    rec.below("complex universal datum: (2,0)+(0,2) parts",
              lambda rng: adhm.complex_adhm_type11_check(adhm.universal_datum(complex_=True), 16, cfg.seed), 1e-9)


SUITES = {
    "algebra": verify_algebra,
    "forms": verify_forms,
    "solutions": verify_solutions,
    "grassmann": verify_grassmann,
    "thooft": verify_thooft,
    "adhm": verify_adhm,
}


def run_suite(name: str, cfg: RunConfig) -> list:
    names = list(SUITES) if name == "all" else [name]
    records = []
    for nm in names:
        rec = Recorder(nm, cfg)
        SUITES[nm](rec)
        records.extend(rec.records)
    return records
