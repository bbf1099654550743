"""Biquadratic polynomials, their resultants and branch sets.

Bivariate polynomials are dense coefficient arrays ``C`` with ``C[i, j]`` the
coefficient of ``x**i * y**j``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.signal import convolve2d

from .errors import DegenerateLeading
from .sphquad import InvolutionFactors


@dataclass(frozen=True)
class Biquadratic:
    """``a22 z^2 w^2 + a20 z^2 + a02 w^2 + 2 a11 z w + a00``."""

    a22: float
    a20: float
    a02: float
    a11: float
    a00: float

    def __post_init__(self):
        if not any((self.a22, self.a20, self.a02, self.a11, self.a00)):
            raise ValueError("biquadratic is identically zero")

    @classmethod
    def from_factors(cls, lam, mu, nu) -> "Biquadratic":
        """``(z^2 + lam)(w^2 + mu) - nu z w``."""
        return cls(1.0, float(mu), float(lam), -0.5 * float(nu), float(lam * mu))

    def coeffs(self) -> np.ndarray:
        c = np.zeros((3, 3))
        c[2, 2], c[2, 0], c[0, 2], c[1, 1], c[0, 0] = self.a22, self.a20, self.a02, 2 * self.a11, self.a00
        return c

    def __call__(self, z, w):
        return (
            self.a22 * z * z * w * w + self.a20 * z * z + self.a02 * w * w + 2 * self.a11 * z * w + self.a00
        )

    def z_quadratic(self):
        """Coefficients of ``z^2, z, 1`` as polynomials in ``w`` (ascending)."""
        return (
            np.array([self.a20, 0.0, self.a22]),
            np.array([0.0, 2 * self.a11, 0.0]),
            np.array([self.a00, 0.0, self.a02]),
        )


def _pmul(a, b):
    return convolve2d(a, b)


def _padd(a, b):
    shape = (max(a.shape[0], b.shape[0]), max(a.shape[1], b.shape[1]))
    out = np.zeros(shape)
    out[: a.shape[0], : a.shape[1]] += a
    out[: b.shape[0], : b.shape[1]] += b
    return out


def _perm_parity(p) -> int:
    p = list(p)
    sign = 1
    for i in range(len(p)):
        while p[i] != i:
            j = p[i]
            p[i], p[j] = p[j], p[i]
            sign = -sign
    return sign


def det_poly(M) -> np.ndarray:
    """Leibniz expansion of a determinant with bivariate polynomial entries."""
    n = len(M)
    total = np.zeros((1, 1))
    for perm in itertools.permutations(range(n)):
        term = np.ones((1, 1))
        for i, j in enumerate(perm):
            e = M[i][j]
            if not np.any(e):
                term = None
                break
            term = _pmul(term, e)
        if term is not None:
            total = _padd(total, _perm_parity(perm) * term)
    return total


def resultant_z(p: Biquadratic, q: Biquadratic) -> np.ndarray:
    """Sylvester resultant eliminating ``z``; ``p`` in ``(z, w1)``, ``q`` in ``(z, w2)``.

    Returns a ``(5, 5)`` array indexed by powers of ``(w1, w2)``.
    """
    if p.a22 == 0 and p.a20 == 0 and q.a22 == 0 and q.a20 == 0:
        raise DegenerateLeading("both leading z-coefficients vanish")
    A1, B1, C1 = (c[:, None] for c in p.z_quadratic())
    A2, B2, C2 = (c[None, :] for c in q.z_quadratic())
    Z = np.zeros((1, 1))
    M = [
        [A1, B1, C1, Z],
        [Z, A1, B1, C1],
        [A2, B2, C2, Z],
        [Z, A2, B2, C2],
    ]
    out = np.zeros((5, 5))
    d = det_poly(M)
    out[: d.shape[0], : d.shape[1]] = d
    return out


def polyval2(C, x, y):
    """Evaluate a bivariate coefficient array."""
    x, y = np.asarray(x), np.asarray(y)
    xs = x[..., None] ** np.arange(C.shape[0])
    ys = y[..., None] ** np.arange(C.shape[1])
    return np.einsum("...i,ij,...j->...", xs, C, ys)


def reduced_resultant(zeta1: float, zeta2: float) -> np.ndarray:
    """Closed form of one quarter of the reduced resultant, in ``(g1, g3)``."""
    R = np.zeros((5, 5))
    a = 2 * (1 - 2 * zeta1**2)
    b = 2 * (1 + 2 * zeta2**2)
    R[0, 0] = 1
    R[2, 0] = a
    R[0, 2] = b
    R[4, 0] = 1
    R[2, 2] = 4 * (1 - 2 * zeta1**2 + 2 * zeta2**2)
    R[0, 4] = 1
    R[4, 2] = b
    R[2, 4] = a
    R[4, 4] = 1
    return R


def reduced_pair(zeta1: float, zeta2: float):
    """The first two reduced equations as biquadratics in ``(f1, g1)`` and ``(f1, g3)``."""
    return Biquadratic.from_factors(1.0, 1.0, 4 * zeta1), Biquadratic.from_factors(-1.0, 1.0, 4 * zeta2)


def quadric_factor(p: float) -> np.ndarray:
    """``g1^2 g3^2 + p (g1^2 - g3^2) - 1``."""
    F = np.zeros((3, 3))
    F[2, 2], F[2, 0], F[0, 2], F[0, 0] = 1.0, p, -p, -1.0
    return F


# residual above which the candidate factors are rejected outright
IRREDUCIBLE_TOL = 1e-6


@dataclass(frozen=True)
class Irreducible:
    """Result marker: the reduced resultant does not split."""

    relation_defect: float
    candidate_residual: float
    discriminant_defect: float


def max_normalized(C) -> np.ndarray:
    C = np.asarray(C, dtype=float)
    m = np.max(np.abs(C))
    return C / m if m else C


def _poly_sqrt_defect(c) -> float:
    """Distance of an even-degree polynomial (ascending) from a perfect square.

    The candidate root is built top-down from the leading coefficients.
    """
    p = np.trim_zeros(np.asarray(c, float), "b")[::-1]  # descending
    if p.size == 0:
        return 0.0
    if p.size % 2 == 0 or p[0] <= 0:
        return float("inf")
    d = (p.size - 1) // 2
    q = np.zeros(d + 1)
    q[0] = np.sqrt(p[0])
    for j in range(1, d + 1):
        acc = sum(q[i] * q[j - i] for i in range(1, j))
        q[j] = (p[j] - acc) / (2 * q[0])
    return float(np.max(np.abs(np.polymul(q, q) - p)) / np.max(np.abs(p)))


def discriminant_defect(zeta1: float, zeta2: float) -> float:
    """How far the resultant, as a quadratic in ``g3^2``, is from splitting.

    The coefficients are polynomials in ``g1^2``; the quadratic splits over
    the polynomials iff its discriminant is a perfect square.
    """
    R = reduced_resultant(zeta1, zeta2)
    a = R[::2, 4]  # coefficient of g3^4, ascending in g1^2
    b = R[::2, 2]
    c = R[::2, 0]
    disc = np.polysub(np.polymul(b[::-1], b[::-1]), 4 * np.polymul(a[::-1], c[::-1]))[::-1]
    return _poly_sqrt_defect(disc)


def factor_reduced_resultant(zeta1: float, zeta2: float, tol: float = 1e-9):
    """Split the reduced resultant into its two quadric factors.

    Returns ``(factor_plus, factor_minus)`` with parameters ``(zeta1 +- zeta2)^2``
    or an :class:`Irreducible` record.
    """
    R = reduced_resultant(zeta1, zeta2)
    fp, fm = quadric_factor((zeta1 + zeta2) ** 2), quadric_factor((zeta1 - zeta2) ** 2)
    resid = float(np.max(np.abs(_pmul(fp, fm) - R)) / np.max(np.abs(R)))
    defect = abs(zeta1**2 - zeta2**2 - 1)
    if defect <= tol and resid <= IRREDUCIBLE_TOL:
        return fp, fm
    return Irreducible(defect, resid, discriminant_defect(zeta1, zeta2))


def factor_residual(factors, zeta1, zeta2) -> float:
    fp, fm = factors
    R = reduced_resultant(zeta1, zeta2)
    return float(np.max(np.abs(_pmul(fp, fm) - R)) / np.max(np.abs(R)))


@dataclass(frozen=True)
class BranchSet:
    values: np.ndarray

    def distance(self, other: "BranchSet") -> float:
        return branch_set_distance(self.values, other.values)


def branch_set_distance(a, b) -> float:
    """Largest gap after optimally pairing the points (infinities pair with each other)."""
    a, b = np.asarray(a, complex), np.asarray(b, complex)
    ia, ib = np.isinf(a), np.isinf(b)
    if ia.sum() != ib.sum():
        return float("inf")
    a, b = a[~ia], b[~ib]
    if a.size == 0:
        return 0.0
    cost = np.abs(a[:, None] - b[None, :])
    r, c = linear_sum_assignment(cost)
    return float(cost[r, c].max())


def branch_set_first(zeta1: float) -> BranchSet:
    r = np.sqrt(zeta1 * zeta1 - 1)
    return BranchSet(np.array([zeta1 + r, zeta1 - r, -zeta1 + r, -zeta1 - r], dtype=complex))


def branch_set_second(zeta2: float) -> BranchSet:
    r = np.sqrt(zeta2 * zeta2 + 1)
    return BranchSet(np.array([zeta2 + r, zeta2 - r, -zeta2 + r, -zeta2 - r], dtype=complex))


def branch_points_quad(f: InvolutionFactors) -> BranchSet:
    """Values of ``z`` over which ``(z^2+lam)(w^2+mu) = nu z w`` has a double root in ``w``.

    The discriminant in ``w`` is ``nu^2 z^2 - 4 mu (z^2 + lam)^2``.
    """
    lam, mu, nu = f.lam, f.mu, f.nu
    quartic = [4 * mu, 0.0, 8 * mu * lam - nu * nu, 0.0, 4 * mu * lam * lam]
    roots = np.roots(quartic).astype(complex)
    roots = np.concatenate([roots, np.full(4 - roots.size, np.inf, dtype=complex)])
    return BranchSet(roots)


def system_biquadratics(lam, mu, nu):
    """The four coupling equations as biquadratics.

    ``P1(z, w1)``, ``P2(z, w2)``, ``P3(u, w2)``, ``P4(u, w1)``.
    """
    l1, m1, l3, m3 = lam[0], mu[0], lam[2], mu[2]
    return (
        Biquadratic.from_factors(l1, m1, nu[0]),
        Biquadratic.from_factors(-l1, -m3, nu[1]),
        Biquadratic.from_factors(l3, m3, nu[2]),
        Biquadratic.from_factors(-l3, -m1, nu[3]),
    )


def proportionality_defect(R12, R34) -> float:
    """Distance between max-normalized coefficient arrays, up to sign."""
    a, b = max_normalized(R12), max_normalized(R34)
    return float(min(np.max(np.abs(a - b)), np.max(np.abs(a + b))))


def stachel_report(spec) -> dict:
    """Branch-set coincidence, factorization and resultant proportionality."""
    lam, mu, nu = spec.lam, spec.mu, spec.nu
    P1, P2, P3, P4 = system_biquadratics(lam, mu, nu)
    b1 = branch_points_quad(InvolutionFactors(lam[0], mu[0], nu[0]))
    b2 = branch_points_quad(InvolutionFactors(-lam[0], -mu[2], nu[1]))
    z1, z2 = float(spec.zetas[0]), float(spec.zetas[1])
    fac = factor_reduced_resultant(z1, z2)
    R12 = resultant_z(P1, P2)
    R34 = resultant_z(P4, P3)
    scale = np.sqrt(lam[0])
    return {
        "branch_first": b1,
        "branch_second": b2,
        "branch_distance": b1.distance(b2) / scale,
        "factors": fac,
        "factor_residual": factor_residual(fac, z1, z2) if not isinstance(fac, Irreducible) else np.inf,
        "proportionality": proportionality_defect(R12, R34),
        "R12": R12,
        "R34": R34,
    }
