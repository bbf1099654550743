"""Write an OBJ animation of the reference polyhedron flexing.

    python3 demos/mesh_animation.py OUTDIR [frames]

Each frame is checked for cone closure.  Edge lengths and face angles are
compared across the whole sequence.
"""
import sys

import numpy as np

from oaiflex.embed import build_frames, realize_base, verify_isometry, write_frames
from oaiflex.flexion import Branch, flattening_parameters, flexion_elementary, reduce
from oaiflex.planar import build_spec

DELTAS = np.array([1.36292, 1.41009, 1.80327, 2 * np.pi - 1.36292 - 1.41009 - 1.80327])


def main(outdir, n=120):
    spec = build_spec(DELTAS, -np.arctan(60.0))
    rc = reduce(spec)
    t = np.arange(n) * 2 * np.pi / n
    frames = build_frames(spec, realize_base(spec.deltas), flexion_elementary(rc, Branch(), t))
    paths = write_frames(outdir, frames)
    rep = verify_isometry(frames)
    print(f"{len(paths)} frames in {outdir}")
    print(f"edge drift {rep['edge_length_dev']:.1e}, angle drift {rep['face_angle_dev']:.1e}")
    print(f"worst closure {max(f.closure_error for f in frames):.1e}")
    print("flattening at", ", ".join(f"t={t:.4f} ({n[0]})" for t, n in flattening_parameters(rc)))


if __name__ == "__main__":
    if len(sys.argv) < 2:
        sys.exit(__doc__)
    main(sys.argv[1], int(sys.argv[2]) if len(sys.argv) > 2 else 120)
