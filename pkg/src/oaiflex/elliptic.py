"""Jacobi elliptic functions and the elliptic parameterization of the flexion.

The functions ``sn, cn, dn`` are computed with the descending Landen (AGM)
scheme.  All shifted arguments ``sn(n K + i v, k)`` needed by the flexion are
reduced to real functions of the complementary modulus:

    sn(i v)        =  i sc(v, k')
    sn(K + i v)    =  1 / dn(v, k')
    sn(2K + i v)   = -i sc(v, k')
    sn(3K + i v)   = -1 / dn(v, k')
"""
from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import PoleEncountered
from .flexion import Branch, FlexionSample, ReducedCoeffs

AGM_TOL = 1e-15
SMALL_K = 1e-7


def agm(a: float, b: float, tol: float = AGM_TOL) -> float:
    while abs(a - b) > tol * max(abs(a), 1.0):
        a, b = 0.5 * (a + b), np.sqrt(a * b)
    return 0.5 * (a + b)


def ellip_K(k: float) -> float:
    """Complete elliptic integral of the first kind for modulus ``k``."""
    return np.pi / (2 * agm(1.0, np.sqrt((1 - k) * (1 + k))))


@dataclass(frozen=True)
class EllipticModulus:
    k: float
    k_prime: float
    K: float
    K_prime: float

    @classmethod
    def from_k(cls, k: float) -> "EllipticModulus":
        if not 0.0 < k < 1.0:
            raise ValueError("modulus must lie in (0, 1)")
        kp = np.sqrt((1 - k) * (1 + k))
        K = ellip_K(k)
        # Gauss's second form of the same mean as a consistency check
        K_alt = np.pi / (2 * agm(1 + k, 1 - k))
        if abs(K - K_alt) > 1e-12 * K:
            raise ArithmeticError("AGM evaluations of K disagree")
        return cls(float(k), float(kp), float(K), float(ellip_K(kp)))


def modulus_from_zeta(zeta1: float) -> EllipticModulus:
    if not zeta1 > 1:
        raise ValueError("zeta1 must exceed 1")
    # (zeta1 - sqrt(zeta1^2 - 1))^2 written without cancellation
    k = 1.0 / (zeta1 + np.sqrt(zeta1 * zeta1 - 1)) ** 2
    return EllipticModulus.from_k(k)


def sn_cn_dn(u, k: float):
    """Real Jacobi functions ``(sn, cn, dn)`` for ``0 <= k < 1``."""
    u = np.asarray(u, dtype=float)
    if k < SMALL_K:
        s, c = np.sin(u), np.cos(u)
        corr = 0.25 * k * k * (u - s * c)
        sn = s - corr * c
        cn = c + corr * s
        dn = 1 - 0.5 * k * k * s * s
        return sn, cn, dn
    kp = np.sqrt((1 - k) * (1 + k))
    a, b, c = [1.0], [kp], [k]
    while abs(c[-1]) > AGM_TOL:
        an, bn = a[-1], b[-1]
        a.append(0.5 * (an + bn))
        b.append(np.sqrt(an * bn))
        c.append(0.5 * (an - bn))
        if len(a) > 60:
            break
    n = len(a) - 1
    phi = (2.0**n) * a[n] * u
    for j in range(n, 0, -1):
        phi = 0.5 * (phi + np.arcsin(c[j] / a[j] * np.sin(phi)))
    sn, cn = np.sin(phi), np.cos(phi)
    dn = np.sqrt(kp * kp + k * k * cn * cn)
    return sn, cn, dn


def quarter_shift_eval(n: int, m: int, t, mod: EllipticModulus):
    """``sn(n K + m i K'/2 + i t, k)`` as a homogeneous pair.

    Returns ``(num, den, imaginary)``; the value is ``num/den`` times ``i``
    when ``imaginary`` is true.  ``den`` vanishes at the poles.
    """
    if n not in (0, 1, 2, 3) or m not in (0, 1, 2):
        raise ValueError("n must be in 0..3 and m in 0..2")
    v = m * mod.K_prime / 2 + np.asarray(t, dtype=float)
    s, c, d = sn_cn_dn(v, mod.k_prime)
    sign = 1.0 if n < 2 else -1.0
    if n % 2 == 0:
        return sign * s, c, True
    return sign * np.ones_like(d), d, False


def shifted_sn(n: int, m: int, t, mod: EllipticModulus, tol: float = 1e-300):
    """Complex value of ``sn(n K + m i K'/2 + i t)``; raises at a pole."""
    num, den, imag = quarter_shift_eval(n, m, t, mod)
    if np.any(np.abs(den) <= tol):
        raise PoleEncountered("sn evaluated at a pole")
    val = num / den
    return 1j * val if imag else val + 0j


def flexion_elliptic(rc: ReducedCoeffs, b: Branch, t, mod: EllipticModulus | None = None) -> FlexionSample:
    """Flexion on the parameter range ``[0, 2K')``.

    The branch label is chosen so that ``Branch(s, r)`` traces the same
    curve as the elementary parameterization with the same label.
    """
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if mod is None:
        mod = modulus_from_zeta(rc.zeta1)
    k, Kp = mod.k, mod.K_prime
    sg = rc.sgn_nu
    s12, s34 = rc.s12, rc.s34
    pm = -b.sigma
    lam1, mu1, lam3, mu3 = rc.lam[0], rc.mu[0], rc.lam[2], rc.mu[2]

    dz = sn_cn_dn(t, mod.k_prime)[2]
    z = (sg[0] * np.sqrt(lam1 * k) * np.ones_like(t), dz)
    dw = sn_cn_dn(Kp / 2 + t, mod.k_prime)[2]
    w1 = (np.sqrt(mu1 * k) * np.ones_like(t), dw)

    # the shift K + i K'/2 + pm s12 (K - i K'/2) collapses to a quarter shift
    n_u = int(1 + pm * s12)
    num, den, _ = quarter_shift_eval(n_u, 0, Kp / 2 - pm * s12 * Kp / 2 + t, mod)
    # i * (i * x) = -x for the imaginary cases n = 0, 2
    u = (-sg[3] * np.sqrt(-lam3 * k) * num, den)

    n_w = int(1 - pm * s34)
    num, den, _ = quarter_shift_eval(n_w, 0, pm * s34 * Kp / 2 + t, mod)
    w2 = (-s12 * np.sqrt(-mu3 * k) * num, den)

    hom = np.array([z, w1, u, w2], dtype=float)
    hom[:, 0] *= b.rho
    return FlexionSample(t=t, hom=hom, branch=b)


def wrap_pi(a):
    return np.mod(a + np.pi, 2 * np.pi) - np.pi


def align_parameterizations(rc: ReducedCoeffs, b: Branch, n: int = 720, mod: EllipticModulus | None = None):
    """Fit the shift in ``t_ell = -(K'/pi) t + shift``.

    Minimizes the largest wrapped difference of the four dihedral angles
    over ``n`` uniform elementary samples.  Returns ``(shift, max_diff)``.
    """
    from .flexion import flexion_elementary

    if mod is None:
        mod = modulus_from_zeta(rc.zeta1)
    Kp = mod.K_prime
    te = np.arange(n) * 2 * np.pi / n
    A = flexion_elementary(rc, b, te).angles

    def err(shift):
        B = flexion_elliptic(rc, b, -Kp / np.pi * te + shift, mod).angles
        return np.abs(wrap_pi(A - B)).max()

    grid = np.linspace(0, 2 * Kp, 400, endpoint=False)
    vals = [err(g) for g in grid]
    g0 = grid[int(np.argmin(vals))]
    step = grid[1] - grid[0]
    res = minimize_scalar(err, bounds=(g0 - step, g0 + step), method="bounded", options={"xatol": 1e-10})
    return float(np.mod(res.x, 2 * Kp)), float(res.fun)


def write_comparison_csv(fh, t, angle_elementary, angle_elliptic) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["t", "angle_elementary", "angle_elliptic", "diff"])
    d = wrap_pi(np.asarray(angle_elementary) - np.asarray(angle_elliptic))
    for row in zip(t, angle_elementary, angle_elliptic, d):
        w.writerow([f"{v:.12g}" for v in row])
