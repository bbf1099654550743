"""Screen a coarse grid and print the admissible region layer by layer in s.

    python3 demos/screening_slice.py [resolution]

'#' marks admissible grid points, '.' rejected ones and ' ' degenerate bases.
The central and mirror images of every admissible point are re-searched.
"""
import sys
from collections import Counter

import numpy as np

from oaiflex.screening import admissible_tau, central_image, grid_points, mirror_image, screen_points


def main(n=11):
    pts = grid_points(n)
    res = screen_points(pts)
    print(Counter(p.failure_stage for p in res))
    adm = [p for p in res if p.admissible]
    sym = sum(
        admissible_tau(*central_image(p.x, p.y, p.s), refine=False)[0] is not None
        and admissible_tau(*mirror_image(p.x, p.y, p.s), refine=False)[0] is not None
        for p in adm
    )
    print(f"{len(adm)} admissible, symmetric images admissible for {sym}")

    xs = np.unique(pts[:, 0])
    cells = {tuple(np.round((p.x, p.y, p.s), 9)): p for p in res}
    for sv in xs:
        print(f"s = {sv:+.3f}  (x to the right, y up)")
        for y in xs[::-1]:
            row = ""
            for x in xs:
                p = cells[tuple(np.round((x, y, sv), 9))]
                row += " " if p.failure_stage == "BASE" else "#" if p.admissible else "."
            print("  " + row)


if __name__ == "__main__":
    main(int(sys.argv[1]) if len(sys.argv) > 1 else 11)
