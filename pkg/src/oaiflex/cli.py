"""Command line front end: ``oaiflex {construct,flex,verify,mesh,screen,resultant}``.

All angles are radians.  Exit codes are stable, see :data:`EXIT_CODES`.
"""
from __future__ import annotations

import argparse
import csv
import os
import sys

import numpy as np

from . import embed, flexion, invariants, resultant, screening
from .elliptic import align_parameterizations, flexion_elliptic, modulus_from_zeta, wrap_pi
from .errors import OAIError, RightAngle, TauNotFound
from .planar import BaseAngles, PolyhedronSpec, build_spec, deltas_to_xys

INPUT_TOL = 1e-5
EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_CODES = {
    "RIGHT_ANGLE": 10,
    "TAU": 11,
    "RC_RANGE": 12,
    "BETA": 13,
    "ELLIPTIC": 14,
    "PATTERN": 15,
    "NOT_FLEXIBLE": 16,
    "DEGENERATE": 17,
    "ORTHODIAGONAL": 18,
    "UNREALIZABLE": 19,
    "POLE": 20,
    "RESULTANT": 21,
    "NO_CLOSURE": 22,
    "CLOSURE": 23,
    "GENERIC": 1,
}
ASSUMPTION = {
    "RIGHT_ANGLE": "base angles must avoid right and straight angles and sum to 2*pi",
    "TAU": "no parameter tau satisfies the construction conditions",
    "RC_RANGE": "the quantities r_i, c_i must be real and lie in [-1, 1)",
    "BETA": "every angle beta_i must be defined (|cos beta_i| < 1)",
    "ELLIPTIC": "every spherical quadrilateral must be elliptic",
    "PATTERN": "no cyclic enumeration yields the required sign pattern",
    "NOT_FLEXIBLE": "the reduced coefficients must satisfy zeta1 > 1 and the flexibility relations",
    "DEGENERATE": "spherical quadrilateral is degenerate",
    "ORTHODIAGONAL": "spherical quadrilateral must be orthodiagonal",
    "NO_CLOSURE": "the base quadrilateral must close with positive side lengths",
    "CLOSURE": "vertex cones of the embedding must close",
}


def _floats(text: str, n: int | None = None) -> list:
    try:
        vals = [float(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")
    if n is not None and len(vals) != n:
        raise argparse.ArgumentTypeError(f"expected {n} values, got {len(vals)}")
    return vals


def _signs(text: str) -> np.ndarray:
    vals = [int(v) for v in text.split(",")]
    if len(vals) != 4 or any(v not in (1, -1) for v in vals):
        raise argparse.ArgumentTypeError("expected four signs, e.g. 1,1,-1,1")
    return np.array(vals)


def _sigma(text: str):
    a, _, g = text.partition(";")
    if not g:
        raise argparse.ArgumentTypeError("expected 'a1,a2,a3,a4;g1,g2,g3,g4'")
    return _signs(a), _signs(g)


def _branch(text: str) -> flexion.Branch:
    try:
        return flexion.Branch.parse(text)
    except (KeyError, ValueError):
        raise argparse.ArgumentTypeError(f"branch must look like '+,-', got {text!r}")


def _open_out(path):
    return open(path, "w", newline="") if path and path != "-" else None


def normalize_input_deltas(deltas, tol: float) -> np.ndarray:
    """Accept base angles typed to limited precision.

    The sum may miss 2*pi by up to ``tol``; the last angle is then recomputed
    from the first three.  Angles within ``tol`` of a right angle are
    rejected as right angles.
    """
    d = np.asarray(deltas, dtype=float)
    if abs(d.sum() - 2 * np.pi) > tol:
        raise RightAngle(f"base angles sum to {d.sum():.12g}, not 2*pi")
    d[3] = 2 * np.pi - d[:3].sum()
    near = np.abs(np.mod(d, np.pi) - np.pi / 2) <= tol
    if near.any():
        raise RightAngle(f"angle {int(np.argmax(near)) + 1} is a right angle to input precision")
    return d


def cmd_construct(args) -> int:
    base = BaseAngles(tuple(normalize_input_deltas(args.deltas, args.input_tol)))
    if args.scan_tau:
        p = deltas_to_xys(base)
        tau, stage = screening.admissible_tau(p.x, p.y, p.s, args.tau_grid)
        if tau is None:
            raise TauNotFound(f"no admissible tau on a {args.tau_grid}-point scan (last stage {stage})")
    elif args.tan_tau is not None:
        tau = float(np.arctan(args.tan_tau))
    else:
        tau = args.tau
    spec = build_spec(base.array, tau, sigma=args.sigma)
    text = spec.to_json(args.out if args.out and args.out != "-" else None)
    if not args.out or args.out == "-":
        print(text)
    else:
        print(f"wrote {args.out} (tau = {tau:.12g}, zeta1 = {spec.zetas[0]:.12g})", file=sys.stderr)
    return EXIT_OK


def _flex_rows(spec, b, n, use_elliptic):
    rc = flexion.reduce(spec)
    t = np.arange(n) * 2 * np.pi / n
    smp = flexion.flexion_elementary(rc, b, t)
    res = float(np.max(np.abs(flexion.residual_main(spec, smp))))
    header = ["t", *flexion.NAMES, "branch_sigma", "branch_rho"]
    cols = [t, *smp.angles]
    info = {"residual": res}
    if use_elliptic:
        mod = modulus_from_zeta(rc.zeta1)
        shift, _ = align_parameterizations(rc, b, n=max(n, 360), mod=mod)
        te = -mod.K_prime / np.pi * t + shift
        ell = flexion_elliptic(rc, b, te, mod)
        res = max(res, float(np.max(np.abs(flexion.residual_main(spec, ell)))))
        diff = wrap_pi(smp.angles - ell.angles)
        header += ["t_elliptic", *(f"{nm}_elliptic" for nm in flexion.NAMES), *(f"diff_{nm}" for nm in flexion.NAMES)]
        cols += [te, *ell.angles, *diff]
        info.update(residual=res, shift=shift, max_diff=float(np.max(np.abs(diff))))
    return header, cols, info


def cmd_flex(args) -> int:
    spec = PolyhedronSpec.from_json(args.spec)
    header, cols, info = _flex_rows(spec, args.branch, args.samples, args.elliptic)
    fh = _open_out(args.out) or sys.stdout
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(header)
    n = len(cols[0])
    for j in range(n):
        row = [f"{cols[0][j]:.12g}", *(f"{c[j]:.12g}" for c in cols[1:5]), args.branch.sigma, args.branch.rho]
        row += [f"{c[j]:.12g}" for c in cols[5:]]
        w.writerow(row)
    if fh is not sys.stdout:
        fh.close()
    msg = f"max residual {info['residual']:.3e}"
    if args.elliptic:
        msg += f", elliptic shift {info['shift']:.6f}, max angle difference {info['max_diff']:.3e}"
    print(msg, file=sys.stderr)
    if info["residual"] > invariants.TOL["residual"]:
        print("residual check failed", file=sys.stderr)
        return EXIT_CHECK_FAILED
    return EXIT_OK


def cmd_verify(args) -> int:
    spec = PolyhedronSpec.from_json(args.spec)
    checks = invariants.run_all(spec, args.samples, args.frames)
    for c in checks:
        print(c.row())
    ok = all(c.passed for c in checks)
    print("ALL PASS" if ok else f"{sum(not c.passed for c in checks)} check(s) failed")
    return EXIT_OK if ok else EXIT_CHECK_FAILED


def cmd_mesh(args) -> int:
    spec = PolyhedronSpec.from_json(args.spec)
    rc = flexion.reduce(spec)
    base = embed.realize_base(spec.deltas)
    if args.animate:
        t = np.arange(args.animate) * 2 * np.pi / args.animate
    else:
        t = np.array([args.t])
    frames = embed.build_frames(spec, base, flexion.flexion_elementary(rc, args.branch, t))
    embed.write_frames(args.outdir, frames)
    rep = embed.verify_isometry(frames)
    lines = [f"{k} {v}" for k, v in rep.items()]
    with open(os.path.join(args.outdir, "isometry.txt"), "w") as fh:
        fh.write("\n".join(lines) + "\n")
    print(f"wrote {len(frames)} frame(s) to {args.outdir}; " + ", ".join(lines), file=sys.stderr)
    return EXIT_OK if rep["passed"] else EXIT_CHECK_FAILED


def cmd_screen(args) -> int:
    pts = screening.screen_grid(args.resolution, grid=args.tau_grid, workers=args.workers)
    fh = _open_out(args.out) or sys.stdout
    screening.write_screen_csv(fh, pts)
    if fh is not sys.stdout:
        fh.close()
    if args.dump_deltas:
        for convex, tag in ((True, "convex"), (False, "nonconvex")):
            with open(f"{args.dump_deltas}_{tag}.csv", "w", newline="") as dh:
                screening.write_delta_dump(dh, pts, convex)
    n_ok = sum(p.admissible for p in pts)
    print(f"{n_ok} of {len(pts)} grid points admissible", file=sys.stderr)
    return EXIT_OK


def cmd_resultant(args) -> int:
    spec = PolyhedronSpec.from_json(args.spec)
    rep = resultant.stachel_report(spec)
    z1, z2 = float(spec.zetas[0]), float(spec.zetas[1])
    print(f"zeta1 = {z1:.12g}, zeta2 = {z2:.12g}, zeta1^2 - zeta2^2 = {z1 * z1 - z2 * z2:.12g}")
    fac = rep["factors"]
    if isinstance(fac, resultant.Irreducible):
        print(f"reduced resultant is irreducible: {fac}")
        ok = False
    else:
        for name, p in (("+", (z1 + z2) ** 2), ("-", (z1 - z2) ** 2)):
            print(f"factor {name}: g1^2 g3^2 + {p:.12g} (g1^2 - g3^2) - 1")
        print(f"factorization residual {rep['factor_residual']:.3e}")
        ok = rep["factor_residual"] <= invariants.TOL["factorization"]
    print(f"branch set distance {rep['branch_distance']:.3e}")
    print(f"resultant proportionality defect {rep['proportionality']:.3e}")
    ok = ok and rep["branch_distance"] <= invariants.TOL["branch_sets"]
    print("branch sets coincide and the resultant splits" if ok else "check FAILED")
    return EXIT_OK if ok else EXIT_CHECK_FAILED


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="oaiflex", description="Flexible OAI Kokotsakis polyhedra.")
    sub = ap.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("construct", help="build a polyhedron from base angles")
    p.add_argument("--deltas", type=lambda s: _floats(s, 4), required=True, help="d1,d2,d3,d4 in radians")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--tau", type=float, help="construction parameter in radians")
    g.add_argument("--tan-tau", type=float, help="give tan(tau) instead; tau is taken in (-pi/2, pi/2)")
    g.add_argument("--scan-tau", action="store_true", help="search tau instead of giving it")
    p.add_argument("--tau-grid", type=int, default=screening.DEFAULT_GRID, help="scan points over [0, 2pi)")
    p.add_argument("--input-tol", type=float, default=INPUT_TOL, help="precision of the typed angles")
    p.add_argument("--sigma", type=_sigma, default=None, help="'a1,a2,a3,a4;g1,g2,g3,g4' sign choices")
    p.add_argument("--out", default=None, help="JSON path (default: stdout)")
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("flex", help="sample the flexion")
    p.add_argument("--spec", required=True, help="spec JSON written by construct")
    p.add_argument("--branch", type=_branch, default=flexion.Branch(1, 1), help="sigma,rho signs, e.g. +,- (default +,+)")
    p.add_argument("--samples", type=int, default=720, help="uniform samples of t over one period")
    p.add_argument("--elliptic", action="store_true", help="add the aligned elliptic parameterization")
    p.add_argument("--out", default=None, help="CSV path (default: stdout)")
    p.set_defaults(func=cmd_flex)

    p = sub.add_parser("verify", help="run every invariant suite")
    p.add_argument("--spec", required=True, help="spec JSON written by construct")
    p.add_argument("--samples", type=int, default=invariants.N_SAMPLES, help="flexion samples per branch")
    p.add_argument("--frames", type=int, default=invariants.N_FRAMES, help="mesh frames per branch")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("mesh", help="write OBJ frames of the flexing surface")
    p.add_argument("--spec", required=True, help="spec JSON written by construct")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--t", type=float, default=0.0, help="single frame at this parameter")
    g.add_argument("--animate", type=int, default=0, metavar="N", help="N frames over one period")
    p.add_argument("--branch", type=_branch, default=flexion.Branch(1, 1), help="sigma,rho signs, e.g. +,-")
    p.add_argument("--outdir", required=True, help="directory for OBJ frames")
    p.set_defaults(func=cmd_mesh)

    p = sub.add_parser("screen", help="scan the (x, y, s) parameter space")
    p.add_argument("--resolution", type=int, required=True, help="grid points per axis")
    p.add_argument("--out", default=None, help="CSV path (default: stdout)")
    p.add_argument("--workers", type=int, default=1, help="worker processes")
    p.add_argument("--tau-grid", type=int, default=screening.DEFAULT_GRID, help="tau scan points per grid point")
    p.add_argument("--dump-deltas", default=None, metavar="PREFIX", help="write PREFIX_convex.csv and PREFIX_nonconvex.csv")
    p.set_defaults(func=cmd_screen)

    p = sub.add_parser("resultant", help="factor the reduced resultant and compare branch sets")
    p.add_argument("--spec", required=True, help="spec JSON written by construct")
    p.set_defaults(func=cmd_resultant)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except OAIError as exc:
        hint = ASSUMPTION.get(exc.stage, "")
        print(f"error [{exc.stage}]: {exc}" + (f" ({hint})" if hint else ""), file=sys.stderr)
        return EXIT_CODES.get(exc.stage, 1)
    except OSError as exc:
        print(f"error [IO]: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
