"""Elementary-function flexion of an OAI polyhedron.

The tangent half-angles ``(z, w1, u, w2)`` of the four base dihedral angles
are returned as homogeneous pairs ``(num, den)`` so that the flattening
positions, where ``u`` or ``w2`` passes through infinity, are ordinary values.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import NoValidPattern, NotFlexible
from .planar import SIGN_PATTERN, PolyhedronSpec, sign_pattern

NAMES = ("phi", "psi1", "theta", "psi2")
VARS = ("z", "w1", "u", "w2")


@dataclass(frozen=True)
class ReducedCoeffs:
    zetas: np.ndarray
    sgn_nu: np.ndarray
    lam: np.ndarray
    mu: np.ndarray
    nu: np.ndarray

    @property
    def zeta1(self) -> float:
        return float(self.zetas[0])

    @property
    def zeta2(self) -> float:
        return float(self.zetas[1])

    @property
    def scales(self) -> np.ndarray:
        """``sqrt(lam1), sqrt(mu1), sqrt(-lam3), sqrt(-mu3)``."""
        return np.sqrt([self.lam[0], self.mu[0], -self.lam[2], -self.mu[2]])

    @property
    def s12(self) -> float:
        return float(self.sgn_nu[0] * self.sgn_nu[1])

    @property
    def s34(self) -> float:
        return float(self.sgn_nu[2] * self.sgn_nu[3])


@dataclass(frozen=True)
class Branch:
    sigma: int = 1
    rho: int = 1

    def __post_init__(self):
        if self.sigma not in (1, -1) or self.rho not in (1, -1):
            raise ValueError("branch signs must be +1 or -1")

    @classmethod
    def parse(cls, text: str) -> "Branch":
        a, b = (p.strip() for p in text.split(","))
        conv = {"+": 1, "-": -1, "+1": 1, "-1": -1, "1": 1}
        return cls(conv[a], conv[b])

    def label(self) -> str:
        return ("+" if self.sigma > 0 else "-") + ("+" if self.rho > 0 else "-")


ALL_BRANCHES = tuple(Branch(s, r) for s in (1, -1) for r in (1, -1))


@dataclass
class FlexionSample:
    """Samples along one branch.  ``hom`` has shape ``(4, 2, n)``."""

    t: np.ndarray
    hom: np.ndarray
    branch: Branch

    @property
    def values(self) -> np.ndarray:
        num, den = self.hom[:, 0], self.hom[:, 1]
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(den == 0, np.inf, num / np.where(den == 0, 1.0, den))

    @property
    def angles(self) -> np.ndarray:
        """Dihedral angles ``(phi, psi1, theta, psi2)`` in ``[0, 2*pi)``."""
        num, den = self.hom[:, 0], self.hom[:, 1]
        flip = np.where((den < 0) | ((den == 0) & (num < 0)), -1.0, 1.0)
        return np.mod(2 * np.arctan2(flip * num, flip * den), 2 * np.pi)

    def __len__(self):
        return len(self.t)


def reduce(spec: PolyhedronSpec, tol: float = 1e-9) -> ReducedCoeffs:
    lam, mu, nu = spec.lam, spec.mu, spec.nu
    if not np.array_equal(sign_pattern(lam, mu), SIGN_PATTERN):
        raise NoValidPattern("spec is not on the canonical sign pattern")
    z = np.abs(nu) / (4 * np.sqrt(np.abs(lam * mu)))
    z[2] = nu[2] * np.sign(nu[0] * nu[1] * nu[3]) / (4 * np.sqrt(lam[2] * mu[2]))
    rc = ReducedCoeffs(zetas=z, sgn_nu=np.sign(nu), lam=lam, mu=mu, nu=nu)
    if not z[0] > 1:
        raise NotFlexible(f"zeta1 = {z[0]:.12g} <= 1")
    dev = np.array([z[0] ** 2 - z[2] ** 2, z[1] ** 2 - z[3] ** 2, z[0] ** 2 - z[1] ** 2 - 1])
    if np.max(np.abs(dev)) > tol * max(1.0, z[0] ** 2):
        raise NotFlexible(f"zeta relations violated by {np.max(np.abs(dev)):.3e}")
    return rc


def reduced_from_zeta(zeta1: float) -> ReducedCoeffs:
    """Reduced coefficients with unit scales and all ``nu`` positive.

    ``lam = (1, -1, -1, 1)``, ``mu = (1, 1, -1, -1)`` and ``zeta3 = zeta1``.
    """
    if not zeta1 > 1:
        raise NotFlexible(f"zeta1 = {zeta1} <= 1")
    z2 = np.sqrt(zeta1**2 - 1)
    zetas = np.array([zeta1, z2, zeta1, z2])
    return ReducedCoeffs(
        zetas=zetas,
        sgn_nu=np.ones(4),
        lam=np.array([1.0, -1.0, -1.0, 1.0]),
        mu=np.array([1.0, 1.0, -1.0, -1.0]),
        nu=4 * zetas,
    )


def F(t, zeta1):
    s = np.sin(t)
    return s * np.sqrt(zeta1 - 1) + np.sqrt(1 + (zeta1 - 1) * s * s)


def G(t, zeta1):
    s = np.sin(t)
    return s * np.sqrt(1 + (zeta1 - 1) * s * s)


def V(t, zeta1):
    return np.sin(t) * np.sqrt(1 + (zeta1 - 1) * np.cos(t) ** 2)


def _root_pair(sq, a, h, d):
    """Homogeneous root ``sq * (a + h) / d`` of a quadratic whose roots multiply to ``sq**2``.

    When ``a + h`` is the smaller of ``|a +- h|`` the equivalent form
    ``sq * d / (a - h)`` avoids the cancellation.
    """
    plus, minus = a + h, a - h
    use_direct = np.abs(plus) >= np.abs(minus)
    num = np.where(use_direct, sq * plus, sq * d)
    den = np.where(use_direct, d, minus)
    return num, den


def flexion_elementary(rc: ReducedCoeffs, b: Branch, t) -> FlexionSample:
    t = np.atleast_1d(np.asarray(t, dtype=float))
    z1 = rc.zeta1
    sl1, sm1, sl3, sm3 = rc.scales
    sg = rc.sgn_nu
    a = np.sqrt(z1 + 1)
    pm = b.sigma
    f1 = F(t, z1) * F(t + np.pi / 2, z1)
    g1 = F(t, z1) * F(t - np.pi / 2, z1)
    one = np.ones_like(t)

    h_u = G(t, z1) + G(t + np.pi / 2, z1)
    d_u = V(t, z1) - V(t + np.pi / 2, z1)
    u_num, u_den = _root_pair(sl3, a, pm * h_u, d_u)
    u_num = sg[3] * u_num

    h_w = G(t, z1) + G(t - np.pi / 2, z1)
    d_w = V(t, z1) - V(t - np.pi / 2, z1)
    # s12 * a + pm * s34 * h == s12 * (a + pm * s12 * s34 * h)
    w_num, w_den = _root_pair(sm3, a, pm * rc.s12 * rc.s34 * h_w, d_w)
    w_num = rc.s12 * w_num

    hom = np.array(
        [
            [sg[0] * sl1 * f1, one],
            [sm1 * g1, one],
            [u_num, u_den],
            [w_num, w_den],
        ]
    )
    hom[:, 0] *= b.rho
    return FlexionSample(t=t, hom=hom, branch=b)


def _unit(hom):
    n = np.sqrt(hom[:, 0] ** 2 + hom[:, 1] ** 2)
    return hom[:, 0] / n, hom[:, 1] / n


def residual_main(spec_or_rc, sample: FlexionSample) -> np.ndarray:
    """Residuals of the four coupling equations, shape ``(4, n)``.

    Each variable is scaled to a unit homogeneous vector first.
    """
    lam, mu, nu = spec_or_rc.lam, spec_or_rc.mu, spec_or_rc.nu
    (z0, w10, u0, w20), (z1, w11, u1, w21) = _unit(sample.hom)
    l1, m1, l3, m3 = lam[0], mu[0], lam[2], mu[2]
    P1 = (z0**2 + l1 * z1**2) * (w10**2 + m1 * w11**2) - nu[0] * z0 * z1 * w10 * w11
    P2 = (z0**2 - l1 * z1**2) * (w20**2 - m3 * w21**2) - nu[1] * z0 * z1 * w20 * w21
    P3 = (u0**2 + l3 * u1**2) * (w20**2 + m3 * w21**2) - nu[2] * u0 * u1 * w20 * w21
    P4 = (u0**2 - l3 * u1**2) * (w10**2 - m1 * w11**2) - nu[3] * u0 * u1 * w10 * w11
    return np.array([P1, P2, P3, P4])


def reduced_variables(rc: ReducedCoeffs, sample: FlexionSample) -> np.ndarray:
    """Homogeneous ``(f1, g1, f3, g3)``, shape ``(4, 2, n)``."""
    sc = rc.scales
    sgn = np.array([rc.sgn_nu[0], 1.0, rc.sgn_nu[3], rc.s12])
    out = sample.hom.copy()
    out[:, 0] *= (sgn / sc)[:, None]
    return out


def reduced_residual(rc: ReducedCoeffs, red: np.ndarray) -> np.ndarray:
    """Residuals of the reduced system on homogeneous unit vectors."""
    (f1, g1, f3, g3), (f1d, g1d, f3d, g3d) = _unit(red)
    z = rc.zetas
    return np.array(
        [
            (f1**2 + f1d**2) * (g1**2 + g1d**2) - 4 * z[0] * f1 * f1d * g1 * g1d,
            (f1**2 - f1d**2) * (g3**2 + g3d**2) - 4 * z[1] * f1 * f1d * g3 * g3d,
            (f3**2 - f3d**2) * (g3**2 - g3d**2) - 4 * z[2] * f3 * f3d * g3 * g3d,
            (f3**2 + f3d**2) * (g1**2 - g1d**2) - 4 * z[3] * f3 * f3d * g1 * g1d,
        ]
    )


def cosh_coordinates(rc: ReducedCoeffs, t):
    """``X = log(f1/g1)``, ``Y = log(f1 g1)``, so ``cosh X + cosh Y = 2 zeta1``.

    With ``rho = sqrt(2) sinh(omega/2) = sqrt(zeta1 - 1)`` these are
    ``2 arcsinh(rho cos t)`` and ``2 arcsinh(rho sin t)``; the factor 2 is
    needed because ``log F(t) = arcsinh(rho sin t)``.
    """
    omega = np.arccosh(rc.zeta1)
    rho = np.sqrt(2) * np.sinh(omega / 2)
    return 2 * np.arcsinh(rho * np.cos(t)), 2 * np.arcsinh(rho * np.sin(t))


FLATTENING_T = (np.pi / 4, 3 * np.pi / 4, 5 * np.pi / 4, 7 * np.pi / 4)


def flattening_parameters(rc: ReducedCoeffs) -> list:
    """Parameters where a dihedral angle becomes 0 or pi.

    At ``pi/4`` and ``5pi/4`` we have ``g1 = 1`` and ``u`` is 0 or infinite;
    at ``3pi/4`` and ``7pi/4`` ``f1 = 1`` and ``w2`` is 0 or infinite.
    """
    out = []
    for t in FLATTENING_T:
        if np.isclose(t % np.pi, np.pi / 4):
            out.append((t, ("theta",)))
        else:
            out.append((t, ("psi2",)))
    return out


def count_branches(rc: ReducedCoeffs, t: float, tol: float = 1e-8) -> int:
    """Number of (f3, g3) completions with the given positive (f1, g1).

    Solves the second reduced equation for ``g3`` and the fourth for ``f3``
    (two roots each) and counts pairs satisfying the third.
    """
    z = rc.zetas
    f1 = F(t, z[0]) * F(t + np.pi / 2, z[0])
    g1 = F(t, z[0]) * F(t - np.pi / 2, z[0])
    g3s = np.roots([f1**2 - 1, -4 * z[1] * f1, f1**2 - 1])
    f3s = np.roots([g1**2 - 1, -4 * z[3] * g1, g1**2 - 1])
    count = 0
    for f3 in f3s:
        for g3 in g3s:
            if abs(f3.imag) > 1e-12 or abs(g3.imag) > 1e-12:
                continue
            f3r, g3r = f3.real, g3.real
            r = (f3r**2 - 1) * (g3r**2 - 1) - 4 * z[2] * f3r * g3r
            if abs(r) / ((1 + f3r**2) * (1 + g3r**2)) < tol:
                count += 1
    return count


def write_flexion_csv(fh, samples) -> None:
    """Write ``t,phi,psi1,theta,psi2,branch_sigma,branch_rho`` rows."""
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["t", *NAMES, "branch_sigma", "branch_rho"])
    for smp in samples:
        ang = smp.angles
        for j, t in enumerate(smp.t):
            w.writerow([f"{t:.12g}", *(f"{a:.12g}" for a in ang[:, j]), smp.branch.sigma, smp.branch.rho])
