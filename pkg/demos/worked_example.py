"""Construct the reference polyhedron and flex it.

    python3 demos/worked_example.py

Prints the planar angles next to the reference table, the elliptic modulus
and the flexion residuals on all four branches.
"""
import numpy as np

from oaiflex.elliptic import modulus_from_zeta
from oaiflex.flexion import ALL_BRANCHES, flexion_elementary, reduce, residual_main
from oaiflex.planar import build_spec

DELTAS = np.array([1.36292, 1.41009, 1.80327, 2 * np.pi - 1.36292 - 1.41009 - 1.80327])
TABLE = {
    "alpha": [1.34086, 1.42575, 1.69859, 1.81798],
    "beta": [1.11122, 1.18397, 1.61684, 1.68958],
    "gamma": [1.15746, 2.00166, 1.4875, 1.63656],
}


def main():
    spec = build_spec(DELTAS, -np.arctan(60.0))
    A = spec.angles()
    print("vertex  angle   computed   table      diff")
    for j, name in enumerate(("alpha", "beta", "gamma")):
        for i in range(4):
            got, ref = A[i, j], TABLE[name][i]
            print(f"  {i + 1}     {name:<6} {got:.5f}   {ref:.5f}   {got - ref:+.1e}")
    # the reference gamma2, gamma3 are pi minus the orthodiagonal solution
    print("pi - gamma2, pi - gamma3:", np.round(np.pi - A[1:3, 2], 5))

    z1, z2 = spec.zetas[:2]
    print(f"zeta1 = {z1:.6f}, zeta2 = {z2:.6f}, zeta1^2 - zeta2^2 = {z1 * z1 - z2 * z2:.12f}")
    print(f"k = {modulus_from_zeta(z1).k:.6f}")

    rc = reduce(spec)
    t = np.linspace(0, 2 * np.pi, 720, endpoint=False)
    for b in ALL_BRANCHES:
        smp = flexion_elementary(rc, b, t)
        res = np.max(np.abs(residual_main(rc, smp)))
        span = np.ptp(np.unwrap(smp.angles, axis=1), axis=1)
        print(f"branch {b.label()}: max residual {res:.1e}, angle spans {np.round(span, 3)}")


if __name__ == "__main__":
    main()
