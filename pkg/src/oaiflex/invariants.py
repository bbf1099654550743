"""Invariant suites for a constructed polyhedron.

:func:`run_all` is the single source of truth for ``oaiflex verify``: the
command exits with 0 exactly when every check returned here passes.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .embed import FLAT_EDGES, build_frames, realize_base, verify_isometry, wing_edge_angles
from .errors import OAIError
from .flexion import ALL_BRANCHES, FLATTENING_T, flexion_elementary, flattening_parameters, reduce, residual_main
from .planar import (
    SIGN_PATTERN,
    eq8_residual,
    eq9_residual,
    matching_shifts,
    normalize_enumeration,
    shift_spec,
    sign_pattern,
)
from .resultant import Irreducible, stachel_report
from .sphquad import elliptic_margin, involution_factors, orthodiagonal_residual

TOL = {
    "orthodiagonal": 1e-10,
    "elliptic": 1e-9,
    "factors": 1e-9,
    "eq8": 1e-9,
    "eq9": 1e-9,
    "residual": 1e-9,
    "branch_sets": 1e-9,
    "factorization": 1e-12,
    "flattening": 1e-7,
    "isometry": 1e-8,
}
N_SAMPLES = 720
N_FRAMES = 120


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    value: float
    tol: float
    note: str = ""

    def row(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        return f"{mark}  {self.name:<22} {self.value:<12.3e} tol {self.tol:.0e}  {self.note}".rstrip()


def _check(name, value, key, note=""):
    v = float(value)
    return Check(name, bool(np.isfinite(v) and v <= TOL[key]), v, TOL[key], note)


def _fail(name, key, exc):
    return Check(name, False, float("inf"), TOL[key], f"{exc.__class__.__name__}: {exc}")


def sample_params(n: int = N_SAMPLES) -> np.ndarray:
    """``n`` uniform parameters on ``[0, 2 pi)`` plus the flattening triggers."""
    return np.concatenate([np.arange(n) * 2 * np.pi / n, FLATTENING_T])


def quad_checks(spec) -> list:
    out = [_check("orthodiagonal", max(abs(orthodiagonal_residual(q)) for q in spec.quads), "orthodiagonal")]
    A = spec.angles()
    m = elliptic_margin(A[:, 0], A[:, 1], A[:, 2], A[:, 3])
    out.append(Check("elliptic", bool(np.all(m >= TOL["elliptic"])), float(m.min()), TOL["elliptic"], "min margin"))
    dev = 0.0
    for q, f in zip(spec.quads, spec.factors):
        g = involution_factors(q)
        a, b = np.array(f.as_tuple()), np.array(g.as_tuple())
        dev = max(dev, float(np.max(np.abs(a - b) / np.maximum(1.0, np.abs(b)))))
    out.append(_check("factors_match_angles", dev, "factors"))
    return out


def system_checks(spec) -> list:
    lam, mu, nu = spec.lam, spec.mu, spec.nu
    ok = np.array_equal(sign_pattern(lam, mu), SIGN_PATTERN)
    return [
        Check("sign_pattern", ok, 0.0 if ok else 1.0, 0.0),
        _check("z_system_linear", np.max(np.abs(eq8_residual(lam, mu))), "eq8"),
        _check("z_system_quadratic", np.max(np.abs(eq9_residual(lam, mu, nu))), "eq9"),
    ]


def flexion_checks(spec, n: int = N_SAMPLES) -> list:
    try:
        rc = reduce(spec)
    except OAIError as exc:
        return [_fail("flexion_residual", "residual", exc)]
    t = sample_params(n)
    worst = max(float(np.max(np.abs(residual_main(spec, flexion_elementary(rc, b, t))))) for b in ALL_BRANCHES)
    return [_check("flexion_residual", worst, "residual", f"{len(t)} samples x 4 branches")]


def resultant_checks(spec) -> list:
    try:
        rep = stachel_report(spec)
    except OAIError as exc:
        return [_fail("branch_sets", "branch_sets", exc)]
    out = [_check("branch_sets", rep["branch_distance"], "branch_sets")]
    if isinstance(rep["factors"], Irreducible):
        out.append(Check("factorization", False, rep["factors"].relation_defect, TOL["factorization"], "irreducible"))
    else:
        out.append(_check("factorization", rep["factor_residual"], "factorization"))
    return out


def flattening_distance(angles: np.ndarray) -> np.ndarray:
    """Distance of angles from the nearest multiple of pi."""
    a = np.mod(angles, np.pi)
    return np.minimum(a, np.pi - a)


def embedding_checks(spec, n_frames: int = N_FRAMES) -> list:
    try:
        rc = reduce(spec)
        base = realize_base(spec.deltas)
        t = np.arange(n_frames) * 2 * np.pi / n_frames
        iso, flat = 0.0, 0.0
        for b in ALL_BRANCHES:
            rep = verify_isometry(build_frames(spec, base, flexion_elementary(rc, b, t)))
            iso = max(iso, rep["edge_length_dev"], rep["face_angle_dev"], rep["planarity"])
            for tf, names in flattening_parameters(rc):
                (fr,) = build_frames(spec, base, flexion_elementary(rc, b, [tf]))
                ang = flattening_distance(fr.dihedrals[[2 if names[0] == "theta" else 3]])
                wing = wing_edge_angles(fr)
                edges = flattening_distance(np.array([wing[i, j] for i, j in FLAT_EDGES[names[0]]]))
                flat = max(flat, float(ang.max()), float(edges.max()))
    except OAIError as exc:
        return [_fail("isometry", "isometry", exc), _fail("flattening", "flattening", exc)]
    return [
        _check("isometry", iso, "isometry", f"{n_frames} frames x 4 branches"),
        _check("flattening", flat, "flattening", "base angle and two wing edges"),
    ]


def normalized(spec):
    """Bring a spec onto the canonical sign pattern; returns ``(spec, shift)``."""
    ks = matching_shifts(spec)
    if not ks:
        return normalize_enumeration(spec), None  # raises NoValidPattern
    return shift_spec(spec, ks[0]), ks[0]


def run_all(spec, n_samples: int = N_SAMPLES, n_frames: int = N_FRAMES) -> list:
    checks = []
    try:
        spec, k = normalized(spec)
        checks.append(Check("enumeration", True, 0.0, 0.0, f"cyclic shift {k}" if k else "canonical"))
    except OAIError as exc:
        return [Check("enumeration", False, float("inf"), 0.0, str(exc))]
    for suite in (quad_checks, system_checks):
        checks += suite(spec)
    checks += flexion_checks(spec, n_samples)
    checks += resultant_checks(spec)
    checks += embedding_checks(spec, n_frames)
    return checks
