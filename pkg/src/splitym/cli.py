"""``splitym`` command-line interface.

Exit codes: 0 all checks pass, 1 some check failed, 2 usage or parse error,
3 quadrature accuracy not reached, 4 singular or degenerate input.
"""

from __future__ import annotations

import argparse
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from . import adhm, charge, connection as conn, quat, solutions as sol, thooft
from .errors import ChargeAccuracyError, DomainError
from .report import Record, Recorder, RunConfig, build_report, dumps
from .suites import EUCLIDEAN_NOTE, SUITES, run_suite

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_ACCURACY, EXIT_SINGULAR = 0, 1, 2, 3, 4


class UsageError(Exception):
    pass


def _matrix_file(path: str, shape: tuple[int, int]) -> np.ndarray:
    try:
        data = np.loadtxt(path, ndmin=2)
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot read matrix from {path}: {exc}") from None
    if data.shape != shape:
        raise UsageError(f"{path}: expected a {shape[0]}x{shape[1]} matrix, got {data.shape}")
    return data


def _point(text: str) -> np.ndarray:
    try:
        vals = [float(t) for t in text.replace(",", " ").split()]
    except ValueError:
        raise UsageError(f"bad point {text!r}") from None
    if len(vals) != 4:
        raise UsageError("a point needs four coordinates x11,x12,x21,x22")
    return np.array(vals)


def bundled(name: str) -> Path:
    """Path of a bundled ADHM data file (``universal`` or ``degenerate``)."""
    return Path(str(resources.files("splitym") / "data" / f"{name}.txt"))


# ---------------------------------------------------------------- commands

def cmd_verify(args, cfg: RunConfig):
    if args.suite not in SUITES and args.suite != "all":
        raise UsageError(f"unknown suite {args.suite!r}; choose from {', '.join([*SUITES, 'all'])}")
    return run_suite(args.suite, cfg), {"command": "verify", "suite": args.suite}


def cmd_charge(args, cfg: RunConfig):
    if not args.tol > 0:
        raise UsageError("--tol must be positive")
    rec = Recorder("charge", cfg)
    qcfg = charge.ChargeConfig(tolerance=min(cfg.quad_tol, args.tol / 10))
    if args.solution == "split-instanton":
        rec.close("charge: basic split instanton",
                  lambda rng: charge.topological_charge(sol.basic_split_instanton(), qcfg), 1.0, args.tol)
    elif args.solution == "split-anti":
        rec.close("charge: basic split anti-instanton",
                  lambda rng: charge.topological_charge(sol.basic_split_anti_instanton(), qcfg), -1.0, args.tol)
    else:
        rec.close("charge: Euclidean instanton",
                  lambda rng: charge.topological_charge(sol.euclidean_basic_instanton(), qcfg), -1.0, args.tol,
                  note=EUCLIDEAN_NOTE, radial_oracle=charge.euclidean_radial_charge())
    return rec.records, {"command": "charge", "solution": args.solution, "tol": args.tol}


def parse_seed(spec: str):
    """Seed spec: ``f0``, ``quadric:<file>`` or ``poly:<expression in x11, x12, x21, x22>``.

    Returns ``(seed, box, label)`` where ``box`` is the exact ``box22`` of the
    seed as a callable on coordinates, or None when it vanishes identically.
    """
    if spec == "f0":
        return thooft.f0(), None, "f0"
    if spec.startswith("quadric:"):
        Q = _matrix_file(spec.split(":", 1)[1], (4, 4))
        try:
            thooft.inverse_quadric(Q)
        except DomainError as exc:
            raise UsageError(str(exc)) from None
        return thooft.quadric_seed(Q), None, "quadric"
    if spec.startswith("poly:"):
        return _poly_seed(spec.split(":", 1)[1])
    raise UsageError(f"unknown seed spec {spec!r}")


def _poly_seed(expr: str):
    import sympy as sp

    syms = sp.symbols("x11 x12 x21 x22")
    try:
        f = sp.sympify(expr, locals=dict(zip(map(str, syms), syms)))
    except (sp.SympifyError, SyntaxError, TypeError) as exc:
        raise UsageError(f"cannot parse polynomial {expr!r}: {exc}") from None
    if not f.free_symbols <= set(syms) or not f.is_polynomial(*syms):
        raise UsageError(f"{expr!r} is not a polynomial in x11, x12, x21, x22")
    box = sp.diff(f, syms[0], syms[3]) - sp.diff(f, syms[1], syms[2])
    fn = sp.lambdify(syms, f, "numpy")
    grads = [sp.lambdify(syms, sp.diff(f, s), "numpy") for s in syms]
    boxfn = sp.lambdify(syms, box, "numpy")

    def func(x):
        return np.broadcast_to(np.asarray(fn(*np.moveaxis(x, -1, 0)), dtype=float), x.shape[:-1])

    def grad(x):
        cols = [np.broadcast_to(np.asarray(g(*np.moveaxis(x, -1, 0)), dtype=float), x.shape[:-1]) for g in grads]
        return np.stack(cols, axis=-1)

    def boxf(x):
        return np.broadcast_to(np.asarray(boxfn(*np.moveaxis(x, -1, 0)), dtype=float), x.shape[:-1])

    seed = thooft.ScalarSolution(func, grad, name=expr)
    return seed, (None if sp.expand(box) == 0 else boxf), expr


def cmd_thooft(args, cfg: RunConfig):
    seed, box, label = parse_seed(args.spec)
    rec = Recorder("thooft", cfg)
    pts = stream_points(cfg, "thooft-points", 10)
    A = thooft.local_ansatz(seed)
    res = np.asarray(conn.asdym_residual(conn.curvature_fd(A, pts, cfg.fd_step)))
    if box is None:
        rec.below(f"ASD residual of A({label})", lambda rng: np.max(res), 1e-6)
    else:
        rec.truth(f"A({label}) is bounded away from ASD", lambda rng: thooft.bounded_away(res),
                  note="seed is not annihilated by box22", box_max=float(np.max(np.abs(box(pts)))))
    if label == "f0":
        anti = sol.basic_split_anti_instanton()
        rec.below("A(f0) equals the basic anti-instanton", lambda rng: np.max(np.abs(A.potential(pts) - anti.potential(pts))), 1e-9)
    return rec.records, {"command": "thooft", "spec": args.spec}


def stream_points(cfg: RunConfig, name: str, n: int) -> np.ndarray:
    from .report import stream

    return 0.5 * stream(cfg.seed, name, 0).normal(size=(n, 4))


def cmd_xray(args, cfg: RunConfig):
    x = _point(args.point)
    X = quat.from_coords(x)
    if args.phi == "inverse-square":
        phi, oracle = thooft.inverse_square(), float(thooft.f0().func(x))
    elif args.phi.startswith("quadric:"):
        Q = _matrix_file(args.phi.split(":", 1)[1], (4, 4))
        try:
            phi = thooft.inverse_quadric(Q)
        except DomainError as exc:
            raise UsageError(str(exc)) from None
        oracle = float(thooft.quadric_seed(Q).func(x))
    else:
        raise UsageError(f"unknown phi spec {args.phi!r}")
    rec = Recorder("xray", cfg)
    basis = np.vstack([X, np.eye(2)])
    rec.close("X-ray transform at the chart point", lambda rng: thooft.xray_transform(phi, basis), oracle, 1e-8)
    return rec.records, {"command": "xray", "phi": args.phi, "point": x.tolist()}


def cmd_adhm(args, cfg: RunConfig):
    try:
        s = adhm.load_system(args.file)
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot read ADHM data: {exc}") from None
    rec = Recorder("adhm", cfg)
    scan = adhm.nondegeneracy_scan(s, cfg.samples, cfg.seed)
    threshold = adhm.RANK_THRESHOLD * max(np.max(np.abs(s.A)), np.max(np.abs(s.B)), 1.0)
    rec.truth("non-degeneracy", lambda rng: scan.passed, min_sigma=scan.value,
              witness=None if scan.passed else np.round(scan.witness, 12).tolist(), threshold=threshold)
    if not scan.passed:
        return rec.records, {"command": "adhm", "file": getattr(args, "source", args.file)}
    sr = adhm.split_reality_scan(s, cfg.samples, cfg.seed)
    rec.below("split reality of (v^t v)^-1", lambda rng: sr.value, 1e-12)
    x = stream_points(cfg, "adhm-points", cfg.points)
    F = adhm.induced_curvature(s, quat.from_coords(x))
    scale = np.max(np.abs(F), axis=(-3, -2, -1))
    rec.below("SD residual (relative)", lambda rng: np.max(np.asarray(conn.sdym_residual(F)) / scale), 1e-9)
    if s.n == 1:
        rec.close("charge", lambda rng: charge.topological_charge(
            adhm.induced_field(s), charge.ChargeConfig(tolerance=cfg.quad_tol)), float(s.k), 1e-3)
    return rec.records, {"command": "adhm", "file": getattr(args, "source", args.file)}


def cmd_conformal(args, cfg: RunConfig):
    g = _matrix_file(args.g_file, (4, 4))
    try:
        R, U = sol.normal_form(g)
        elem = sol.ConformalElement(g)
    except DomainError as exc:
        raise UsageError(str(exc)) from None
    cs = sol.center_scale(U)
    A = sol.conformal_pullback(U)
    rec = Recorder("conformal", cfg)
    x = stream_points(cfg, "conformal-points", cfg.points) + cs.center.reshape(4)
    rec.below("asdym residual of A_g", lambda rng: np.max(conn.asdym_residual(A.F(x))), 1e-8)
    rec.below("FD vs closed curvature", lambda rng: np.max(np.abs(conn.curvature_fd(A, x, cfg.fd_step) - A.F(x))), 1e-7)
    rec.below("same det F as the plane-bundle field of g",
              lambda rng: np.max(np.abs(sol.det_field(A, x) - sol.det_field(sol.plane_bundle_field(elem), x))), 1e-9)
    rec.close("scale = max |det F|", lambda rng: abs(float(sol.det_field(A, cs.center.reshape(4)))), cs.scale, 1e-9)
    meta = {"command": "conformal", "center": cs.center.tolist(), "scale": cs.scale, "rotation": R.tolist()}
    return rec.records, meta


COMMANDS = {
    "verify": cmd_verify,
    "charge": cmd_charge,
    "thooft": cmd_thooft,
    "xray": cmd_xray,
    "adhm": cmd_adhm,
    "conformal": cmd_conformal,
}


def _global_flags(p: argparse.ArgumentParser, suppress: bool) -> None:
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    p.add_argument("--seed", type=int, default=d(0), help="random seed (default 0)")
    p.add_argument("--fd-step", type=float, default=d(1e-4), help="finite-difference step scale (default 1e-4)")
    p.add_argument("--quad-tol", type=float, default=d(1e-5), help="absolute quadrature tolerance (default 1e-5)")
    p.add_argument("--samples", type=int, default=d(4096), help="ADHM scan sample count (default 4096)")
    p.add_argument("--points", type=int, default=d(100), help="random points per pointwise check (default 100)")
    p.add_argument("--out", default=d(None), help="write the JSON report here instead of stdout")
    p.add_argument("--no-timing", action="store_true", default=d(False),
                   help="record runtime_ms as 0 so reports are bytewise reproducible")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="splitym", description=__doc__.splitlines()[0])
    _global_flags(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_):
        p = sub.add_parser(name, help=help_)
        _global_flags(p, suppress=True)
        return p

    p = add("verify", "run a verification suite")
    p.add_argument("suite", help=f"one of {', '.join([*SUITES, 'all'])}")
    p = add("charge", "topological charge of a named solution")
    p.add_argument("solution", choices=["split-instanton", "split-anti", "euclidean"])
    p.add_argument("--tol", type=float, default=1e-3)
    p = add("thooft", "t'Hooft ansatz from a seed (f0, quadric:<file>, poly:<expr>)")
    p.add_argument("spec")
    p = add("xray", "X-ray transform at a chart point")
    p.add_argument("phi", help="inverse-square or quadric:<file>")
    p.add_argument("point", help="x11,x12,x21,x22")
    p = add("adhm", "scan and verify ADHM data from a file (or 'universal'/'degenerate')")
    p.add_argument("file")
    p = add("conformal", "center, scale and checks for g in SL(4,R) read from a file")
    p.add_argument("g_file")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "adhm":
        args.source = args.file
        if args.file in ("universal", "degenerate") and not Path(args.file).exists():
            args.file = str(bundled(args.file))
    try:
        cfg = RunConfig(seed=args.seed, fd_step=args.fd_step, quad_tol=args.quad_tol, samples=args.samples,
                        points=args.points, timing=not args.no_timing)
    except ValueError as exc:
        parser.print_usage(sys.stderr)
        print(f"splitym: error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    code = EXIT_OK
    meta: dict = {"command": args.command}
    try:
        records, meta = COMMANDS[args.command](args, cfg)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"splitym: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ChargeAccuracyError as exc:
        records = [Record("charge", "quadrature", exc.partial, None, exc.error, False,
                          note="accuracy not reached; value is the partial estimate")]
        code = EXIT_ACCURACY
    except DomainError as exc:
        print(f"splitym: singular input: {exc}", file=sys.stderr)
        return EXIT_SINGULAR
    if code == EXIT_OK and not all(r.passed for r in records):
        code = EXIT_FAIL

    text = dumps(build_report(records, cfg, **meta))
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
