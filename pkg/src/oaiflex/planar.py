"""Planar angles of flexible OAI Kokotsakis polyhedra.

Pipeline: base angles ``delta`` -> ``(x, y, s)`` -> ``r1`` from the closed
form with its coefficient table -> ``(r1, c1, r3, c3)`` by symmetry ->
``alpha, gamma`` by arctangent, ``beta`` from orthodiagonality -> involution
factors -> cyclic re-enumeration onto the canonical sign pattern.

Parameter convention
--------------------
The trigonometric forms ``S, L, N, D`` are quadratic in ``(C, Sn)``.  This
module uses ``C = -cos(tau)`` and ``Sn = sin(tau)``, under which the worked
example at ``tau = -arctan(60)`` lands inside the admissible range and
``Z_i / 2 = 1 + (-1)**i * tan(tau)``.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    BetaUndefined,
    NegativeDiscriminant,
    NoValidPattern,
    NotElliptic,
    OutOfRange,
    RightAngle,
    ZeroDenominator,
)
from .sphquad import (
    InvolutionFactors,
    SphericalQuad,
    elliptic_margin,
    involution_factors,
    wrap_2pi,
)

TWO_PI = 2.0 * np.pi
RANGE_EPS = 1e-12
ELLIPTIC_TOL = 1e-9
SUM_TOL = 1e-9

# canonical signs of (lam_i, mu_i), rows are vertices 1..4
SIGN_PATTERN = np.array([[1, 1], [-1, 1], [-1, -1], [1, -1]])


@dataclass(frozen=True)
class BaseAngles:
    """Interior angles of the base quadrilateral.

    ``strict`` (default) demands angles in ``(0, 2*pi)`` without right or
    straight angles.  The parameter screening also visits points whose
    reconstructed angles leave that range; those are built with
    ``strict=False`` and only require a closing sum.
    """

    deltas: tuple
    strict: bool = True

    def __post_init__(self):
        d = np.asarray(self.deltas, dtype=float)
        if d.shape != (4,) or not np.all(np.isfinite(d)):
            raise RightAngle("need four finite base angles")
        gap = TWO_PI - d.sum()
        if abs(gap) > SUM_TOL:
            raise RightAngle(f"base angles sum to {d.sum():.12g}, not 2*pi")
        d[3] = TWO_PI - d[:3].sum()
        if self.strict:
            if np.any(d <= 0) or np.any(d >= TWO_PI):
                raise RightAngle("base angles must lie in (0, 2*pi)")
            if np.any(np.abs(np.cos(d)) < 1e-9):
                raise RightAngle("base quadrilateral has a right angle")
        if np.any(np.abs(np.sin(d)) < 1e-12):
            raise RightAngle("base quadrilateral has a straight angle")
        object.__setattr__(self, "deltas", tuple(float(v) for v in d))

    @property
    def array(self) -> np.ndarray:
        return np.array(self.deltas)


@dataclass(frozen=True)
class XYSParams:
    x: float
    y: float
    s: float


def deltas_to_xys(b) -> XYSParams:
    d = b.array if isinstance(b, BaseAngles) else np.asarray(b, dtype=float)
    return XYSParams(
        x=float((d[0] - d[2]) / 2),
        y=float((d[1] - d[3]) / 2),
        s=float((d[0] - d[1] + d[2] - d[3]) / 4),
    )


def xys_to_deltas(x, y, s) -> np.ndarray:
    """Base angles for given ``(x, y, s)`` with the sum fixed at 2*pi."""
    h = 0.5 * np.pi
    return np.array([h + s + x, h - s + y, h + s - x, h - s - y])


def coefficient_table(x, y, s) -> dict:
    """The eleven trigonometric coefficients of the closed form for ``r1``.

    Accepts scalars or broadcastable arrays.
    """
    sin, cos = np.sin, np.cos
    c2x, c2y, c2s = cos(2 * x), cos(2 * y), cos(2 * s)
    return {
        "s10": c2x + c2y + 2 * c2s,
        "s01": c2x - c2y,
        "l20": (c2x - c2y) ** 2 + 8 * c2s * (c2x + c2y),
        "l11": 2 * (c2x - c2y) * (c2x + c2y + 2 * c2s),
        "l02": (c2x + c2y - 2 * c2s) ** 2,
        "n20": sin(x + y) * (sin(x - 3 * y) + sin(3 * x - y) + 6 * sin(x - y + 2 * s) - 2 * sin(x - y - 2 * s)),
        "n11": 8 * (sin(x + s) ** 2 * cos(x - s) ** 2 + sin(y - s) ** 2 * cos(y + s) ** 2),
        "n02": (c2y - c2x) * (c2x + c2y - 2 * c2s),
        "d20": cos(x - y) * (cos(3 * x + y) + cos(x + 3 * y) + 2 * cos(x + y - 2 * s) + 4 * cos(x + 3 * s) * cos(y - s)),
        "d11": cos(4 * x) - cos(4 * y) - 4 * sin(x + y) * sin(x - y + 2 * s),
        "d02": sin(x - y) * (sin(x + 3 * y) - sin(3 * x + y) + 2 * sin(x + y - 2 * s) - 4 * cos(x + 3 * s) * sin(y - s)),
    }


def forms(tau, x, y, s):
    """Return ``(S, L, N, D)`` at parameter ``tau`` (see module docstring)."""
    t = coefficient_table(x, y, s)
    C, Sn = -np.cos(tau), np.sin(tau)
    S = t["s10"] * C + t["s01"] * Sn
    L = t["l20"] * C * C + t["l11"] * Sn * C + t["l02"] * Sn * Sn
    N = t["n20"] * C * C + t["n11"] * Sn * C + t["n02"] * Sn * Sn
    D = t["d20"] * C * C + t["d11"] * Sn * C + t["d02"] * Sn * Sn
    return S, L, N, D


def product_form(tau, x, y, s):
    """``E`` with ``N**2 - S**2 L = 4 D E``, so the two roots multiply to ``E / D``."""
    C, Sn = -np.cos(tau), np.sin(tau)
    a, b = np.cos(x - s) ** 2, np.cos(y + s) ** 2
    return -4 * C * (a * (C + Sn) + b * (C - Sn))


def _root(S, N, D, E, q):
    """``(N + q) / (2D)`` with ``q = +-S sqrt(L)``, evaluated without cancellation.

    When ``N`` and ``q`` have opposite signs the equivalent ``2E / (N - q)``
    is used instead.
    """
    with np.errstate(all="ignore"):
        return np.where(N * q >= 0, (N + q) / (2 * D), 2 * E / (N - q))


def r1_raw(tau, x, y, s, conjugate: bool = False):
    """Vectorized ``(N + S sqrt(L)) / (2D)``; NaN/inf where undefined.

    Returns ``(r, L, D)`` so callers can apply their own validity checks.
    """
    S, L, N, D = forms(tau, x, y, s)
    with np.errstate(invalid="ignore"):
        q = (-1.0 if conjugate else 1.0) * S * np.sqrt(np.where(L >= 0, L, np.nan))
    r = _root(S, N, D, product_form(tau, x, y, s), q)
    return r, L, D


def r1_of(tau: float, p: XYSParams, tol: float = 1e-12, conjugate: bool = False) -> float:
    """Scalar root with range-independent validity checks.

    ``conjugate`` gives the value at ``tau + pi`` (only ``S`` changes sign)
    without rounding ``tau + pi``.
    """
    # extended precision where the platform has it: the coefficients cancel
    # near their zero sets and r feeds quantities of size up to |tan(tau)|
    tau, x, y, s = (np.longdouble(v) for v in (tau, p.x, p.y, p.s))
    S, L, N, D = forms(tau, x, y, s)
    if L < -tol:
        raise NegativeDiscriminant(f"L = {L:.3e} < 0")
    if abs(D) < tol:
        raise ZeroDenominator(f"|D| = {abs(D):.3e}")
    q = (-1 if conjugate else 1) * S * np.sqrt(max(L, np.longdouble(0)))
    return float(_root(S, N, D, product_form(tau, x, y, s), q))


@dataclass(frozen=True)
class RCQuadruple:
    r1: float
    c1: float
    r3: float
    c3: float

    @property
    def r(self) -> np.ndarray:
        return np.array([self.r1, -self.r1, self.r3, -self.r3])

    @property
    def c(self) -> np.ndarray:
        return np.array([self.c1, -self.c3, self.c3, -self.c1])


def rc_raw(tau, x, y, s):
    """Vectorized ``(r, c, L)`` with ``r, c`` of shape ``(4, ...)``.

    ``L`` stacks the four discriminants; no range checks are applied.
    """
    R1, L1, _ = r1_raw(tau, x, y, s)
    C1, L2, _ = r1_raw(tau, x, -y, s, conjugate=True)
    R3, L3, _ = r1_raw(tau, -x, -y, s)
    C3, L4, _ = r1_raw(tau, -x, y, s, conjugate=True)
    r = np.array([R1, -R1, R3, -R3])
    c = np.array([C1, -C3, C3, -C1])
    return r, c, np.array([L1, L2, L3, L4])


def in_range(v):
    """Half-open range ``-1 <= v < 1`` with ``v`` nonzero (elementwise)."""
    return (v >= -1.0) & (v < 1.0 - RANGE_EPS) & (v != 0.0)


def rc_quadruple(tau: float, p: XYSParams) -> RCQuadruple:
    rc = RCQuadruple(
        r1_of(tau, p),
        r1_of(tau, XYSParams(p.x, -p.y, p.s), conjugate=True),
        r1_of(tau, XYSParams(-p.x, -p.y, p.s)),
        r1_of(tau, XYSParams(-p.x, p.y, p.s), conjugate=True),
    )
    vals = np.concatenate([rc.r, rc.c])
    bad = ~in_range(vals)
    if bad.any():
        raise OutOfRange(f"r, c = {vals.round(6).tolist()} outside [-1, 1) or zero")
    return rc


def z_values(rc: RCQuadruple, deltas) -> np.ndarray:
    """``Z_i = (1/r_i - 1)(1/c_i - 1) / cos(delta_i)**2``."""
    d = np.asarray(deltas, dtype=float)
    return (1 / rc.r - 1) * (1 / rc.c - 1) / np.cos(d) ** 2


def rc_to_lambda_mu(rc: RCQuadruple, lam_signs=(1, 1, 1, 1), mu_signs=(1, 1, 1, 1)):
    """Invert ``r = 2 lam / (lam**2 + 1)`` at every vertex.

    A ``+1`` sign picks the root with ``|lam| >= 1``, ``-1`` its reciprocal.
    Returns ``(lam, mu)`` arrays of length four.
    """
    r, c = rc.r, rc.c
    ls, ms = np.asarray(lam_signs, float), np.asarray(mu_signs, float)
    lam = (1 + ls * np.sqrt(np.clip(1 - r * r, 0, None))) / r
    mu = (1 + ms * np.sqrt(np.clip(1 - c * c, 0, None))) / c
    return lam, mu


def sigma_assignments():
    """All 16 sign vectors allowed by the pairing constraints.

    Ordered with the all-plus choice first.
    """
    out = []
    for a1, a3, g1, g2 in itertools.product((1, -1), repeat=4):
        out.append((np.array([a1, a1, a3, a3]), np.array([g1, g2, g2, g1])))
    return out


def _check_sigma(sa, sg):
    sa, sg = np.asarray(sa), np.asarray(sg)
    if not (set(np.abs(sa)) <= {1} and set(np.abs(sg)) <= {1}):
        raise ValueError("sigma entries must be +1 or -1")
    if sa[0] * sa[1] != 1 or sa[2] * sa[3] != 1 or sg[0] * sg[3] != 1 or sg[1] * sg[2] != 1:
        raise ValueError("sigma violates the pairing constraints")


def recover_angle_arrays(deltas, r, c, sa, sg):
    """Vectorized angle recovery.  Returns ``(alpha, beta_cos, gamma)``.

    ``beta_cos`` is ``cos(alpha) cos(gamma) / cos(delta)`` and may fall
    outside ``[-1, 1]``.
    """
    d = np.asarray(deltas, dtype=float)
    td = np.tan(d)
    with np.errstate(all="ignore"):
        qa = np.sqrt((1 - r) / (1 + r))
        qg = np.sqrt((1 - c) / (1 + c))
    al = np.mod(np.arctan(sa * qa * td), np.pi)
    ga = np.mod(np.arctan(sg * qg * td), np.pi)
    cb = np.cos(al) * np.cos(ga) / np.cos(d)
    return al, cb, ga


def recover_angles(b: BaseAngles, rc: RCQuadruple, sigma_alpha=(1, 1, 1, 1), sigma_gamma=(1, 1, 1, 1)):
    """Planar angles of the four vertex quadrilaterals."""
    _check_sigma(sigma_alpha, sigma_gamma)
    d = b.array
    al, cb, ga = recover_angle_arrays(d, rc.r, rc.c, np.asarray(sigma_alpha), np.asarray(sigma_gamma))
    if np.any(np.abs(cb) >= 1):
        i = int(np.argmax(np.abs(cb)))
        raise BetaUndefined(f"|cos(beta_{i + 1})| = {abs(cb[i]):.6g} >= 1")
    be = np.arccos(cb)
    m = elliptic_margin(al, be, ga, d)
    if np.any(m < ELLIPTIC_TOL):
        raise NotElliptic(f"quadrilateral {int(np.argmin(m)) + 1} is not elliptic")
    return [SphericalQuad(al[i], be[i], ga[i], d[i]) for i in range(4)]


def apply_vertex_symmetry(q: SphericalQuad, which: int) -> SphericalQuad:
    """Angle substitutions that leave the involution factors unchanged.

    1: (alpha, gamma) -> (alpha - pi, gamma - pi)
    2: (alpha, beta) -> (alpha - pi, pi - beta)
    3: (gamma, beta) -> (gamma - pi, pi - beta)
    """
    a, b, g, d = q.alpha, q.beta, q.gamma, q.delta
    if which == 1:
        a, g = a - np.pi, g - np.pi
    elif which == 2:
        a, b = a - np.pi, np.pi - b
    elif which == 3:
        g, b = g - np.pi, np.pi - b
    else:
        raise ValueError("which must be 1, 2 or 3")
    return SphericalQuad(wrap_2pi(a), b, wrap_2pi(g), d)


@dataclass
class PolyhedronSpec:
    """Planar angles and derived data of one OAI polyhedron."""

    deltas: np.ndarray
    tau: float
    quads: list
    factors: list
    zetas: np.ndarray
    enumeration: tuple = (0, 1, 2, 3)
    sigma_alpha: np.ndarray = field(default_factory=lambda: np.ones(4, int))
    sigma_gamma: np.ndarray = field(default_factory=lambda: np.ones(4, int))

    @property
    def lam(self) -> np.ndarray:
        return np.array([f.lam for f in self.factors])

    @property
    def mu(self) -> np.ndarray:
        return np.array([f.mu for f in self.factors])

    @property
    def nu(self) -> np.ndarray:
        return np.array([f.nu for f in self.factors])

    def angles(self) -> np.ndarray:
        """Array of shape (4, 4): rows are vertices, columns alpha, beta, gamma, delta."""
        return np.array([q.as_array() for q in self.quads])

    def to_dict(self) -> dict:
        return {
            "deltas": [float(v) for v in self.deltas],
            "tau": float(self.tau),
            "vertices": [
                {
                    "alpha": q.alpha,
                    "beta": q.beta,
                    "gamma": q.gamma,
                    "delta": q.delta,
                    "lambda": f.lam,
                    "mu": f.mu,
                    "nu": f.nu,
                }
                for q, f in zip(self.quads, self.factors)
            ],
            "zetas": [float(v) for v in self.zetas],
            "enumeration": [int(v) for v in self.enumeration],
            "sigma": {
                "alpha": [int(v) for v in self.sigma_alpha],
                "gamma": [int(v) for v in self.sigma_gamma],
            },
        }

    def to_json(self, path=None) -> str:
        text = json.dumps(self.to_dict(), indent=2)
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text + "\n")
        return text

    @classmethod
    def from_dict(cls, data: dict) -> "PolyhedronSpec":
        verts = data["vertices"]
        quads = [SphericalQuad(v["alpha"], v["beta"], v["gamma"], v["delta"]) for v in verts]
        factors = [InvolutionFactors(v["lambda"], v["mu"], v["nu"]) for v in verts]
        sig = data.get("sigma", {})
        return cls(
            deltas=np.asarray(data["deltas"], float),
            tau=float(data["tau"]),
            quads=quads,
            factors=factors,
            zetas=np.asarray(data["zetas"], float),
            enumeration=tuple(data.get("enumeration", (0, 1, 2, 3))),
            sigma_alpha=np.asarray(sig.get("alpha", [1] * 4), int),
            sigma_gamma=np.asarray(sig.get("gamma", [1] * 4), int),
        )

    @classmethod
    def from_json(cls, path) -> "PolyhedronSpec":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def compute_zetas(lam, mu, nu) -> np.ndarray:
    """Reduced coefficients; only meaningful on the canonical sign pattern."""
    z = np.abs(nu) / (4 * np.sqrt(np.abs(lam * mu)))
    z[2] = nu[2] * np.sign(nu[0] * nu[1] * nu[3]) / (4 * np.sqrt(lam[2] * mu[2]))
    return z


def eq8_residual(lam, mu) -> np.ndarray:
    return np.array([lam[0] + lam[1], mu[0] + mu[3], mu[1] + mu[2], lam[2] + lam[3]])


def eq9_residual(lam, mu, nu) -> np.ndarray:
    """Residuals of the resultant-proportionality conditions, scaled by 16."""
    q = nu**2 / (lam * mu)
    return np.array([q[0] - q[2], q[1] - q[3], q[0] + q[1] - 16]) / 16


def sign_pattern(lam, mu) -> np.ndarray:
    return np.stack([np.sign(lam), np.sign(mu)], axis=1).astype(int)


def shift_spec(spec: PolyhedronSpec, k: int) -> PolyhedronSpec:
    """Cyclic re-enumeration: new vertex ``i`` is old vertex ``i + k``.

    An odd shift moves the alpha-carrying edges onto gamma positions, so the
    roles of (alpha, lam, sigma_alpha) and (gamma, mu, sigma_gamma) swap.
    """
    k %= 4
    idx = [(i + k) % 4 for i in range(4)]
    quads, factors = [], []
    for i in idx:
        q, f = spec.quads[i], spec.factors[i]
        if k % 2:
            q = SphericalQuad(q.gamma, q.beta, q.alpha, q.delta)
            f = InvolutionFactors(f.mu, f.lam, f.nu)
        quads.append(q)
        factors.append(f)
    sa, sg = np.asarray(spec.sigma_alpha)[idx], np.asarray(spec.sigma_gamma)[idx]
    if k % 2:
        sa, sg = sg, sa
    lam = np.array([f.lam for f in factors])
    mu = np.array([f.mu for f in factors])
    nu = np.array([f.nu for f in factors])
    with np.errstate(all="ignore"):
        zetas = compute_zetas(lam, mu, nu)
    return PolyhedronSpec(
        deltas=np.asarray(spec.deltas)[idx],
        tau=spec.tau,
        quads=quads,
        factors=factors,
        zetas=zetas,
        enumeration=tuple(spec.enumeration[i] for i in idx),
        sigma_alpha=sa,
        sigma_gamma=sg,
    )


def matching_shifts(spec: PolyhedronSpec) -> list:
    """All cyclic shifts that bring the spec onto the canonical sign pattern."""
    return [k for k in range(4) if np.array_equal(sign_pattern(*(_lm(shift_spec(spec, k)))), SIGN_PATTERN)]


def _lm(spec):
    return spec.lam, spec.mu


def normalize_enumeration(spec: PolyhedronSpec) -> PolyhedronSpec:
    ks = matching_shifts(spec)
    if not ks:
        raise NoValidPattern(f"sign pattern {sign_pattern(spec.lam, spec.mu).tolist()} has no canonical rotation")
    return shift_spec(spec, ks[0])


def _minus_one(q, r, s):
    """``lam - 1`` for ``tan(alpha) = s q tan(delta)`` without cancellation near ``q = 1``."""
    with np.errstate(all="ignore"):
        return np.where(s > 0, q * (1 + q) * (1 + r) / r, -2 * q / (1 + q))


def factors_from_rc(deltas, rc: RCQuadruple, sa, sg, quads) -> list:
    """Involution factors straight from ``(r, c)``, bypassing the recovered angles.

    Going through the angles loses digits when ``alpha`` is close to
    ``delta`` (large ``lam``); here ``lam - 1 = 2 s q / (1 - s q)`` is
    rewritten so no nearly equal numbers are subtracted.  Vertices where
    this is not finite (``r = -1``) fall back to the angle formulas.
    """
    d = np.asarray(deltas, float)
    r, c = rc.r, rc.c
    with np.errstate(all="ignore"):
        qa = np.sqrt((1 - r) / (1 + r))
        qg = np.sqrt((1 - c) / (1 + c))
        lm1 = _minus_one(qa, r, np.asarray(sa))
        mm1 = _minus_one(qg, c, np.asarray(sg))
        nu = lm1 * mm1 / np.cos(d)
    out = []
    for i, q in enumerate(quads):
        vals = (1 + lm1[i], 1 + mm1[i], nu[i])
        if all(np.isfinite(vals)) and all(vals):
            out.append(InvolutionFactors(*(float(v) for v in vals)))
        else:
            out.append(involution_factors(q))
    return out


def build_spec(deltas, tau: float, sigma=None, strict: bool = True) -> PolyhedronSpec:
    """Construct the polyhedron for base angles ``deltas`` at parameter ``tau``.

    ``sigma`` is a pair ``(sigma_alpha, sigma_gamma)``; when omitted the
    allowed assignments are tried in order (all-plus first) and the first
    one giving elliptic quadrilaterals is kept.
    """
    base = BaseAngles(tuple(np.asarray(deltas, float)), strict=strict)
    p = deltas_to_xys(base)
    rc = rc_quadruple(tau, p)
    choices = [tuple(np.asarray(v) for v in sigma)] if sigma is not None else sigma_assignments()
    err = None
    for sa, sg in choices:
        try:
            quads = recover_angles(base, rc, sa, sg)
        except NotElliptic as exc:
            err = exc
            continue
        factors = factors_from_rc(base.array, rc, sa, sg, quads)
        lam = np.array([f.lam for f in factors])
        mu = np.array([f.mu for f in factors])
        nu = np.array([f.nu for f in factors])
        with np.errstate(all="ignore"):
            zetas = compute_zetas(lam, mu, nu)
        spec = PolyhedronSpec(
            deltas=base.array,
            tau=float(tau),
            quads=quads,
            factors=factors,
            zetas=zetas,
            sigma_alpha=np.asarray(sa, int),
            sigma_gamma=np.asarray(sg, int),
        )
        return normalize_enumeration(spec)
    raise err
