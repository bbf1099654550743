"""Orthodiagonal spherical quadrilaterals and their involution factors.

A spherical quadrilateral is stored by its four side lengths
``(alpha, beta, gamma, delta)`` in cyclic order.  For an orthodiagonal
elliptic quadrilateral the tangent half-angles ``z = tan(phi/2)`` and
``w = tan(psi/2)`` of the two dihedral angles adjacent to ``delta`` satisfy

    (z**2 + lam) * (w**2 + mu) = nu * z * w .
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateQuad, NotOrthodiagonal, Unrealizable

TWO_PI = 2.0 * np.pi
HALF_PI = 0.5 * np.pi
RIGHT_TOL = 1e-9  # distance from pi/2 that selects the special cases
DENOM_TOL = 1e-14


def wrap_2pi(a):
    """Reduce angles into [0, 2*pi)."""
    return np.mod(a, TWO_PI)


def _is_right(a: float) -> bool:
    return abs(a - HALF_PI) < RIGHT_TOL


@dataclass(frozen=True)
class SphericalQuad:
    """Side lengths of a spherical quadrilateral (radians).

    ``alpha``, ``gamma`` and ``delta`` may lie in ``(pi, 2*pi)``; ``beta`` is
    kept in ``(0, pi)``.  A reflex ``delta`` arises from non-convex bases.
    """

    alpha: float
    beta: float
    gamma: float
    delta: float

    def __post_init__(self):
        vals = []
        for name in ("alpha", "beta", "gamma", "delta"):
            v = float(getattr(self, name))
            if not np.isfinite(v):
                raise DegenerateQuad(f"{name} is not finite")
            v = float(wrap_2pi(v))
            if min(abs(v), abs(v - np.pi), abs(v - TWO_PI)) < 1e-12:
                raise DegenerateQuad(f"{name} is a multiple of pi")
            object.__setattr__(self, name, v)
            vals.append(v)
        if not 0.0 < vals[1] < np.pi:
            raise DegenerateQuad("beta must lie in (0, pi)")

    def as_array(self) -> np.ndarray:
        return np.array([self.alpha, self.beta, self.gamma, self.delta])


@dataclass(frozen=True)
class InvolutionFactors:
    lam: float
    mu: float
    nu: float

    def __post_init__(self):
        for name in ("lam", "mu", "nu"):
            v = getattr(self, name)
            if not np.isfinite(v) or v == 0.0:
                raise DegenerateQuad(f"involution factor {name}={v} must be finite and nonzero")

    def as_tuple(self):
        return (self.lam, self.mu, self.nu)


@dataclass(frozen=True)
class DiagonalSegments:
    """Distances from the diagonal crossing point to the four vertices."""

    a: float
    b: float
    c: float
    d: float

    def sides(self) -> np.ndarray:
        """Side lengths recovered by the spherical Pythagorean theorem."""
        ca, cb, cc, cd = np.cos([self.a, self.b, self.c, self.d])
        return np.arccos([ca * cb, cb * cc, cc * cd, cd * ca])


def orthodiagonal_residual(q: SphericalQuad) -> float:
    return float(np.cos(q.alpha) * np.cos(q.gamma) - np.cos(q.beta) * np.cos(q.delta))


def is_orthodiagonal(q: SphericalQuad, tol: float = 1e-10) -> bool:
    return abs(orthodiagonal_residual(q)) <= tol


def elliptic_margin(alpha, beta, gamma, delta):
    """Smallest distance of any ``alpha +- beta +- gamma +- delta`` to 2*pi*Z.

    Works elementwise on arrays.
    """
    out = None
    for e1, e2, e3 in itertools.product((1.0, -1.0), repeat=3):
        v = alpha + e1 * beta + e2 * gamma + e3 * delta
        dist = np.abs(np.mod(v + np.pi, TWO_PI) - np.pi)
        out = dist if out is None else np.minimum(out, dist)
    return out


def is_elliptic(q: SphericalQuad, tol: float = 1e-9) -> bool:
    return bool(elliptic_margin(q.alpha, q.beta, q.gamma, q.delta) >= tol)


def involution_factors(q: SphericalQuad) -> InvolutionFactors:
    """Involution factors ``(lam, mu, nu)`` of an orthodiagonal quadrilateral.

    Away from right angles the tangent quotients are evaluated through the
    equivalent sine forms, e.g. ``lam = sin(delta+alpha) / sin(delta-alpha)``,
    which stay accurate when ``tan(delta)`` blows up.
    """
    al, be, ga, de = q.alpha, q.beta, q.gamma, q.delta
    a_r, g_r, d_r = _is_right(al), _is_right(ga), _is_right(de)

    def quotient(num, den, what):
        if abs(den) < DENOM_TOL:
            raise DegenerateQuad(f"vanishing denominator in {what}")
        return num / den

    if a_r and d_r:
        lam = quotient(np.cos(be) + np.cos(ga), np.cos(be) - np.cos(ga), "lambda")
    else:
        lam = quotient(np.sin(de + al), np.sin(de - al), "lambda")
    if g_r and d_r:
        mu = quotient(np.cos(be) + np.cos(al), np.cos(be) - np.cos(al), "mu")
    else:
        mu = quotient(np.sin(de + ga), np.sin(de - ga), "mu")

    if not d_r:
        # (lam-1)(mu-1)/cos(delta) with the cosine factors cancelled
        nu = quotient(
            4.0 * np.cos(de) * np.sin(al) * np.sin(ga),
            np.sin(de - al) * np.sin(de - ga),
            "nu",
        )
    elif g_r and not a_r:
        nu = 2.0 * (mu - 1.0) * np.tan(al)
    elif a_r and not g_r:
        nu = 2.0 * (lam - 1.0) * np.tan(ga)
    else:
        # alpha = gamma = delta = pi/2 is not covered by the case analysis
        raise DegenerateQuad("no formula for nu with delta and both of alpha, gamma right")
    return InvolutionFactors(float(lam), float(mu), float(nu))


def _homog(v):
    """Homogeneous pair for a projective value given as float, inf or (num, den)."""
    if isinstance(v, tuple):
        return float(v[0]), float(v[1])
    if np.isinf(v):
        return 1.0, 0.0
    return float(v), 1.0


def config_residual(f: InvolutionFactors, z, w) -> float:
    """Evaluate ``(z^2+lam)(w^2+mu) - nu z w`` on the projective line.

    ``z`` and ``w`` may be floats, ``inf`` or homogeneous ``(num, den)`` pairs.
    """
    z0, z1 = _homog(z)
    w0, w1 = _homog(w)
    return (z0 * z0 + f.lam * z1 * z1) * (w0 * w0 + f.mu * w1 * w1) - f.nu * z0 * z1 * w0 * w1


def construct_orthodiagonal(alpha, beta, gamma, delta, tol: float = 1e-10) -> DiagonalSegments:
    """Realize an orthodiagonal quadrilateral by its diagonal segments.

    With the diagonals crossing at right angles, each side is the hypotenuse
    of a right triangle: ``cos a cos b = cos alpha`` and so on.  Given the sides
    the segments form a one-parameter family (the quadrilateral flexes); the
    feasible range of ``|cos a|`` is an explicit interval and we take its
    geometric midpoint.
    """
    ca, cb, cg, cd = np.cos([alpha, beta, gamma, delta])
    if abs(ca * cg - cb * cd) > tol:
        raise NotOrthodiagonal(f"cos(alpha)cos(gamma) - cos(beta)cos(delta) = {ca * cg - cb * cd:.3e}")
    if min(abs(ca), abs(cb), abs(cg), abs(cd)) < 1e-12:
        raise Unrealizable("right-angled sides give a degenerate segment family")
    lo = max(abs(ca), abs(cd))
    hi = min(1.0, abs(ca / cb))
    if not lo < hi:
        raise Unrealizable("no segment lengths realize these sides")
    c_a = np.sqrt(lo * hi)
    c_b = ca / c_a
    c_c = cb / c_b
    c_d = cd / c_a
    segs = np.arccos(np.clip([c_a, c_b, c_c, c_d], -1.0, 1.0))
    out = DiagonalSegments(*map(float, segs))
    res = np.cos(out.sides()) - np.array([ca, cb, cg, cd])
    if np.max(np.abs(res)) > 1e-10:
        raise Unrealizable(f"segment construction residual {np.max(np.abs(res)):.3e}")
    return out
