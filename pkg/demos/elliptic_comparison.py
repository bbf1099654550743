"""Compare the elementary and elliptic flexion of the reference polyhedron.

    python3 demos/elliptic_comparison.py [out.csv]

The elliptic curve is shifted so that it best matches the elementary one.
Its parameter runs at a fixed rate against ``t``, so only the shift is free.
The remaining difference shows the two parameterizations are related
nonlinearly.
"""
import sys

import numpy as np

from oaiflex.elliptic import align_parameterizations, flexion_elliptic, modulus_from_zeta, write_comparison_csv
from oaiflex.flexion import NAMES, Branch, flexion_elementary, reduce
from oaiflex.planar import build_spec

DELTAS = np.array([1.36292, 1.41009, 1.80327, 2 * np.pi - 1.36292 - 1.41009 - 1.80327])


def main(out=None):
    rc = reduce(build_spec(DELTAS, -np.arctan(60.0)))
    mod = modulus_from_zeta(rc.zeta1)
    print(f"k = {mod.k:.6f}, K = {mod.K:.6f}, K' = {mod.K_prime:.6f}")
    b = Branch()
    shift, diff = align_parameterizations(rc, b, mod=mod)
    print(f"best shift {shift:.6f}, max dihedral difference {diff:.4f} rad")

    t = np.linspace(0, 2 * np.pi, 360, endpoint=False)
    A = flexion_elementary(rc, b, t).angles
    B = flexion_elliptic(rc, b, -mod.K_prime / np.pi * t + shift, mod).angles
    for i, name in enumerate(NAMES):
        d = np.angle(np.exp(1j * (A[i] - B[i])))
        print(f"  {name:<5} max |diff| {np.abs(d).max():.4f} at t = {t[np.argmax(np.abs(d))]:.3f}")
    if out:
        with open(out, "w") as fh:
            write_comparison_csv(fh, t, A[2], B[2])
        print("theta comparison written to", out)


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else None)
