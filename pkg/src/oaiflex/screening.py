"""Screening of the ``(x, y, s)`` parameter space.

A point is admissible when some ``tau`` passes, in order: the discriminant
and range conditions on ``r_i, c_i`` (``RC_RANGE``), definedness of every
``beta_i`` (``BETA``) and ellipticity of the four quadrilaterals for at least
one admissible sign choice (``ELLIPTIC``).  Points whose base has a right or
straight angle are reported as ``BASE``.
"""
from __future__ import annotations

import csv
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import OAIError
from .planar import build_spec, coefficient_table, in_range, sigma_assignments, xys_to_deltas
from .sphquad import elliptic_margin

STAGES = ("BASE", "RC_RANGE", "BETA", "ELLIPTIC", "NONE")
DEFAULT_GRID = 1024
BISECT_STEPS = 40
SECTIONS = 64
WITNESS_SAMPLES = 65
ELL_TOL = 1e-9
# denominators below this fraction of their coefficient size are treated as 0/0;
# the absolute floor matches the construction pipeline
DEN_REL_TOL = 1e-8
DEN_ABS_TOL = 1e-12
_SIGMAS = sigma_assignments()
_PM = np.array([1.0, -1.0])[:, None, None]
# each assignment as per-vertex indices into (+, -) for sigma_alpha, sigma_gamma
_SIGMA_IDX = [((1 - sa) // 2, (1 - sg) // 2) for sa, sg in _SIGMAS]


@dataclass(frozen=True)
class ScreenPoint:
    x: float
    y: float
    s: float
    admissible: bool
    tau: float | None
    failure_stage: str
    convex: bool

    @property
    def deltas(self) -> np.ndarray:
        return xys_to_deltas(self.x, self.y, self.s)


def degenerate_base(deltas) -> bool:
    return bool(np.any(np.abs(np.sin(2 * np.asarray(deltas))) < 1e-9))


# (sign of S, sign of x, sign of y); a sign flip of S is the shift tau -> tau + pi
_VARIANTS = ((1.0, 1, 1), (-1.0, 1, -1), (1.0, -1, -1), (-1.0, -1, 1))


class _Evaluator:
    """Stage evaluation at one ``(x, y, s)`` with the coefficient tables cached."""

    def __init__(self, x, y, s):
        self.d = xys_to_deltas(x, y, s)
        self.td = np.tan(self.d)[:, None]
        self.cd = np.cos(self.d)[:, None]
        self.tables = []
        for _, sx, sy in _VARIANTS:
            t = coefficient_table(sx * x, sy * y, s)
            t = {k: float(v) for k, v in t.items()}
            t["ea"], t["eb"] = np.cos(sx * x - s) ** 2, np.cos(sy * y + s) ** 2
            t["floor"] = max(DEN_REL_TOL * (abs(t["d20"]) + abs(t["d11"]) + abs(t["d02"])), DEN_ABS_TOL)
            self.tables.append(t)

    def rc(self, tau, with_disc: bool = False):
        """``(r, c, ok)``; ``ok`` flags taus where all eight values are well defined.

        With ``with_disc`` the four discriminants, each divided by the sum of
        its coefficient magnitudes, are appended.
        """
        out, ok, disc = [], np.ones(tau.shape, bool), []
        C, Sn = -np.cos(tau), np.sin(tau)
        for (sg, _, _), t in zip(_VARIANTS, self.tables):
            S = t["s10"] * C + t["s01"] * Sn
            L = t["l20"] * C * C + t["l11"] * Sn * C + t["l02"] * Sn * Sn
            N = t["n20"] * C * C + t["n11"] * Sn * C + t["n02"] * Sn * Sn
            D = t["d20"] * C * C + t["d11"] * Sn * C + t["d02"] * Sn * Sn
            good = (L >= 0) & (np.abs(D) > t["floor"])
            q = sg * S * np.sqrt(np.where(good, L, 0.0))
            E = -4 * C * (t["ea"] * (C + Sn) + t["eb"] * (C - Sn))
            with np.errstate(all="ignore"):
                # the root without cancellation, see planar.product_form
                out.append(np.where(N * q >= 0, (N + q) / (2 * D), 2 * E / (N - q)))
            ok &= good
            disc.append(L / (abs(t["l20"]) + abs(t["l11"]) + abs(t["l02"]) + DEN_ABS_TOL))
        R1, C1, R3, C3 = out
        r, c = np.array([R1, -R1, R3, -R3]), np.array([C1, -C3, C3, -C1])
        if with_disc:
            return r, c, ok, np.array(disc)
        return r, c, ok

    def codes(self, tau) -> np.ndarray:
        tau = np.atleast_1d(np.asarray(tau, dtype=float))
        r, c, ok_rc = self.rc(tau)
        ok_rc &= np.all(in_range(r), axis=0) & np.all(in_range(c), axis=0)
        code = np.where(ok_rc, 2, 1)
        idx = np.flatnonzero(ok_rc)
        if idx.size == 0:
            return code
        r, c = r[:, idx], c[:, idx]
        td, cd = self.td, self.cd
        qa = np.sqrt((1 - r) / (1 + r))
        qg = np.sqrt((1 - c) / (1 + c))
        # |cos(beta)| < 1  <=>  cos^2(delta) (1 + qa^2 tan^2) (1 + qg^2 tan^2) > 1
        ok_b = np.all(cd**2 * (1 + (qa * td) ** 2) * (1 + (qg * td) ** 2) > 1, axis=0)
        code[idx[ok_b]] = 3
        idx, qa, qg = idx[ok_b], qa[:, ok_b], qg[:, ok_b]
        if idx.size == 0:
            return code
        # margins depend on the signs at one vertex only: evaluate the four
        # (sigma_alpha, sigma_gamma) pairs per vertex, then combine
        al = np.mod(np.arctan(_PM * qa * td), np.pi)  # (2, 4, m)
        ga = np.mod(np.arctan(_PM * qg * td), np.pi)
        be = np.arccos(np.clip(np.cos(al)[:, None] * np.cos(ga)[None] / cd, -1, 1))  # (2, 2, 4, m)
        good = elliptic_margin(al[:, None], be, ga[None], self.d[:, None]) >= ELL_TOL
        v = np.arange(4)
        ok_e = np.zeros(idx.size, bool)
        for ia, ig in _SIGMA_IDX:
            ok_e |= np.all(good[ia, ig, v], axis=0)
        code[idx[ok_e]] = 4
        return code


def stage_codes(x, y, s, tau) -> np.ndarray:
    """Furthest stage reached at each ``tau``: 1 (RC failed) ... 4 (passed)."""
    return _Evaluator(x, y, s).codes(tau)


def _runs(ok):
    idx = np.flatnonzero(ok)
    parts = np.split(idx, np.flatnonzero(np.diff(idx) > 1) + 1)
    return sorted(((p[0], p[-1]) for p in parts), key=lambda r: r[0] - r[1])


def _refine(ev, tau, j0, j1, steps=BISECT_STEPS, sections=SECTIONS):
    """Shrink both end brackets of the passing run ``j0..j1``; return the passing interval.

    Each round splits both brackets into ``sections`` parts in one vectorized
    evaluation, so ``steps`` bisection steps cost ``steps / log2(sections)``
    rounds.
    """
    h = tau[1] - tau[0]
    lo = [tau[j0] - h, tau[j0]]  # (failing, passing)
    hi = [tau[j1], tau[j1] + h]  # (passing, failing)
    frac = np.arange(1, sections) / sections
    for _ in range(-(-steps // int(np.log2(sections)))):
        pl = lo[0] + frac * (lo[1] - lo[0])
        ph = hi[0] + frac * (hi[1] - hi[0])
        ok = ev.codes(np.concatenate([pl, ph])) == 4
        okl, okh = ok[: frac.size], ok[frac.size :]
        # last failing point from the outside in, first failing point from the inside out
        k = np.flatnonzero(~okl)
        k = k[-1] + 1 if k.size else 0
        lo = [lo[0] if k == 0 else pl[k - 1], lo[1] if k == frac.size else pl[k]]
        k = np.flatnonzero(~okh)
        k = k[0] if k.size else frac.size
        hi = [hi[0] if k == 0 else ph[k - 1], hi[1] if k == frac.size else ph[k]]
    return float(lo[1]), float(hi[0])


def _best_conditioned(ev, cand):
    """Passing candidate whose ``|r|, |c|`` stay farthest from 0 and from 1.

    Near 1 the factors depend on ``sqrt(1 - r**2)``; near 0 they blow up
    like ``2 / r``; where a discriminant vanishes ``r`` itself depends on its
    square root.  All of these lose digits, so the run midpoint is not always
    a good witness.
    """
    cand = np.atleast_1d(np.asarray(cand, dtype=float))
    ok = ev.codes(cand) == 4
    if not ok.any():
        return None
    r, c, _, disc = ev.rc(cand, with_disc=True)
    with np.errstate(invalid="ignore"):
        v = np.abs(np.concatenate([r, c]))
        margin = np.minimum(np.min(np.minimum(v, 1 - v), axis=0), np.sqrt(np.min(disc, axis=0)))
    margin = np.where(ok & np.isfinite(margin), margin, -np.inf)
    return float(cand[int(np.argmax(margin))])


def admissible_tau(x, y, s, grid: int = DEFAULT_GRID, refine: bool = True, validate: bool = True):
    """Search ``tau`` in ``[0, 2 pi)``.  Returns ``(tau or None, stage)``.

    Passing runs are tried longest first.  With ``validate`` the witness must
    also survive the full construction; otherwise the stage of the last
    construction error is reported.
    """
    d = xys_to_deltas(x, y, s)
    if degenerate_base(d):
        return None, "BASE"
    ev = _Evaluator(x, y, s)
    tau = np.arange(grid) * (2 * np.pi / grid)
    code = ev.codes(tau)
    ok = code == 4
    if not ok.any():
        return None, STAGES[int(code.max())]
    stage = "ELLIPTIC"
    for j0, j1 in _runs(ok):
        if refine:
            a, b = _refine(ev, tau, j0, j1)
            t = _best_conditioned(ev, np.linspace(a, b, WITNESS_SAMPLES + 2)[1:-1])
        else:
            t = _best_conditioned(ev, tau[j0 + 1 : j1] if j1 - j0 > 1 else tau[j0 : j1 + 1])
        if t is None:
            t = float(tau[(j0 + j1) // 2])
        if not validate:
            return t, "NONE"
        try:
            build_spec(d, t, strict=False)
        except OAIError as e:
            stage = e.stage if e.stage in STAGES else "ELLIPTIC"
            continue
        return t, "NONE"
    return None, stage


def screen_point(p, grid: int = DEFAULT_GRID, refine: bool = True, validate: bool = True) -> ScreenPoint:
    x, y, s = (float(v) for v in p)
    tau, stage = admissible_tau(x, y, s, grid, refine, validate)
    d = xys_to_deltas(x, y, s)
    convex = bool(np.all((d > 0) & (d < np.pi)))
    return ScreenPoint(x, y, s, tau is not None, tau, stage, convex)


def grid_points(resolution: int, bounds=((-np.pi / 2, np.pi / 2),) * 3) -> np.ndarray:
    """Cell centres in row-major ``(x, y, s)`` order, shape ``(R**3, 3)``."""
    if resolution < 2:
        raise ValueError("resolution must be at least 2")
    axes = [lo + (np.arange(resolution) + 0.5) * (hi - lo) / resolution for lo, hi in bounds]
    X, Y, S = np.meshgrid(*axes, indexing="ij")
    return np.stack([X.ravel(), Y.ravel(), S.ravel()], axis=1)


def _screen_chunk(args):
    pts, grid, refine = args
    return [screen_point(p, grid, refine) for p in pts]


def screen_points(points, grid: int = DEFAULT_GRID, refine: bool = True, workers: int = 1) -> list:
    points = np.asarray(points, dtype=float)
    if workers <= 1 or len(points) < 2:
        return _screen_chunk((points, grid, refine))
    chunks = np.array_split(points, workers * 8)
    with ProcessPoolExecutor(max_workers=workers) as ex:
        parts = ex.map(_screen_chunk, [(c, grid, refine) for c in chunks])
        return [sp for part in parts for sp in part]


def screen_grid(resolution: int, bounds=((-np.pi / 2, np.pi / 2),) * 3, grid: int = DEFAULT_GRID,
                workers: int = 1, refine: bool = True) -> list:
    return screen_points(grid_points(resolution, bounds), grid, refine, workers)


def central_image(x, y, s):
    return np.pi / 2 - x, np.pi / 2 - y, np.pi / 2 - s


def mirror_image(x, y, s):
    return y, x, s


def write_screen_csv(fh, points) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["x", "y", "s", "admissible", "tau", "failure_stage", "convex"])
    for p in points:
        tau = "" if p.tau is None else f"{p.tau:.10g}"
        w.writerow([f"{p.x:.10g}", f"{p.y:.10g}", f"{p.s:.10g}", int(p.admissible), tau, p.failure_stage, int(p.convex)])


def write_delta_dump(fh, points, convex: bool = True) -> None:
    """Base angles ``(delta1, delta2, delta3)`` of admissible points of one convexity class."""
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["delta1", "delta2", "delta3"])
    for p in points:
        if p.admissible and p.convex == convex:
            d = p.deltas
            w.writerow([f"{v:.10g}" for v in d[:3]])
