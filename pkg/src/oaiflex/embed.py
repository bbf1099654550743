"""Realization of the flexing polyhedron in space.

Layout
------
The base ``A1..A4`` lies counter-clockwise in the plane ``z = 0``.  Every base
edge carries a wing quadrilateral; its plane is the base plane turned about
the directed edge ``A_i -> A_{i+1}`` by the exterior dihedral angle, so an
angle of 0 leaves the wing flat in the base plane.

The edge-to-angle assignment that makes every vertex cone close is

    A1A2: phi   (planar angles alpha1, alpha2)
    A2A3: psi2  (gamma2, gamma3)
    A3A4: theta (alpha3, alpha4)
    A4A1: psi1  (gamma4, gamma1)

Vertices of a frame: ``A_i`` (index ``i``), the tip of the ray at ``A_i`` in
the wing on ``A_i A_{i+1}`` (index ``4 + 2i``) and the tip of the ray at
``A_i`` in the wing on ``A_{i-1} A_i`` (index ``5 + 2i``).  Faces: the base,
four wing quadrilaterals and four triangles.
"""
from __future__ import annotations

import csv
import os
from dataclasses import dataclass, field

import numpy as np

from .errors import ClosureFailure, NoClosure

# flexion angle index (phi, psi1, theta, psi2) for base edges A1A2, A2A3, A3A4, A4A1
EDGE_ANGLE = (0, 3, 2, 1)
CLOSURE_TOL = 1e-8


@dataclass(frozen=True)
class BaseRealization:
    A: np.ndarray  # (4, 3)
    lengths: np.ndarray  # (4,)

    def interior_angles(self) -> np.ndarray:
        out = np.empty(4)
        for i in range(4):
            a = self.A[(i + 1) % 4] - self.A[i]
            b = self.A[(i - 1) % 4] - self.A[i]
            out[i] = np.mod(np.arctan2(a[0] * b[1] - a[1] * b[0], a @ b), 2 * np.pi)
        return out


def realize_base(deltas) -> BaseRealization:
    d = np.asarray(deltas, dtype=float)
    th = np.cumsum([0.0, np.pi - d[1], np.pi - d[2], np.pi - d[3]])
    E = np.stack([np.cos(th), np.sin(th)], axis=1)
    M = np.stack([E[2], E[3]], axis=1)
    if abs(np.linalg.det(M)) < 1e-12:
        raise NoClosure("closure system is singular")
    l34 = np.linalg.solve(M, -(E[0] + E[1]))
    lengths = np.array([1.0, 1.0, *l34])
    if np.any(lengths <= 0):
        raise NoClosure(f"non-positive side lengths {lengths.round(6).tolist()}")
    A = np.zeros((4, 3))
    for i in range(3):
        A[i + 1, :2] = A[i, :2] + lengths[i] * E[i]
    return BaseRealization(A, lengths)


def rotation(axis, angle) -> np.ndarray:
    """Rodrigues rotation matrix about a unit axis."""
    a = np.asarray(axis, float)
    a = a / np.linalg.norm(a)
    K = np.array([[0, -a[2], a[1]], [a[2], 0, -a[0]], [-a[1], a[0], 0]])
    return np.eye(3) + np.sin(angle) * K + (1 - np.cos(angle)) * (K @ K)


def _turn_in_plane(v, a):
    """Rotate a vector of the base plane by ``a`` about +z."""
    c, s = np.cos(a), np.sin(a)
    return np.array([v[0] * c - v[1] * s, v[0] * s + v[1] * c, v[2]])


def wing_planar_angles(spec, swap: bool = False) -> list:
    """Planar angles ``(at A_i, at A_{i+1})`` of the wing on edge ``A_i A_{i+1}``."""
    ang = spec.angles()
    al, ga = (ang[:, 2], ang[:, 0]) if swap else (ang[:, 0], ang[:, 2])
    return [(al[0], al[1]), (ga[1], ga[2]), (al[2], al[3]), (ga[3], ga[0])]


@dataclass
class MeshFrame:
    vertices: np.ndarray
    faces: list
    t: float
    branch: str
    dihedrals: np.ndarray  # (phi, psi1, theta, psi2)
    mapping: str = "alpha-first"
    closure_error: float = 0.0
    meta: dict = field(default_factory=dict)


FACES = [[0, 1, 2, 3]]
FACES += [[w, (w + 1) % 4, 5 + 2 * ((w + 1) % 4), 4 + 2 * w] for w in range(4)]
FACES += [[i, 5 + 2 * i, 4 + 2 * i] for i in range(4)]


def _rays(base: BaseRealization, chi, planar):
    """Unit rays: ``nxt[i]`` in the wing on ``A_i A_{i+1}``, ``prv[i]`` in the wing on ``A_{i-1} A_i``."""
    A = base.A
    nxt, prv = np.zeros((4, 3)), np.zeros((4, 3))
    for i in range(4):
        j = (i + 1) % 4
        e = A[j] - A[i]
        e /= np.linalg.norm(e)
        R = rotation(e, chi[i])
        nxt[i] = R @ _turn_in_plane(e, -planar[i][0])
        prv[j] = R @ _turn_in_plane(-e, planar[i][1])
    return nxt, prv


def closure_errors(nxt, prv, betas) -> np.ndarray:
    cosb = np.clip(np.einsum("ij,ij->i", nxt, prv), -1.0, 1.0)
    return np.abs(np.arccos(cosb) - betas)


def build_frame(spec, base: BaseRealization, dihedrals, t: float = 0.0, branch: str = "++",
                tol: float = CLOSURE_TOL) -> MeshFrame:
    """Frame for one configuration ``dihedrals = (phi, psi1, theta, psi2)``."""
    dihedrals = np.asarray(dihedrals, dtype=float)
    chi = dihedrals[list(EDGE_ANGLE)]
    betas = spec.angles()[:, 1]
    err = None
    for swap in (False, True):
        nxt, prv = _rays(base, chi, wing_planar_angles(spec, swap))
        err = closure_errors(nxt, prv, betas)
        if err.max() <= tol:
            V = np.zeros((12, 3))
            V[:4] = base.A
            V[4::2] = base.A + nxt
            V[5::2] = base.A + prv
            return MeshFrame(
                vertices=V,
                faces=[list(f) for f in FACES],
                t=float(t),
                branch=branch,
                dihedrals=dihedrals,
                mapping="gamma-first" if swap else "alpha-first",
                closure_error=float(err.max()),
            )
    raise ClosureFailure(f"vertex cones do not close (max error {err.max():.3e})")


def build_frames(spec, base: BaseRealization, sample, tol: float = CLOSURE_TOL) -> list:
    ang = sample.angles
    label = sample.branch.label()
    return [build_frame(spec, base, ang[:, j], sample.t[j], label, tol) for j in range(len(sample.t))]


def signed_dihedral(axis, p, q) -> float:
    """Angle from half-plane ``(axis, p)`` to ``(axis, q)`` about ``axis``."""
    a = axis / np.linalg.norm(axis)
    p = p - (p @ a) * a
    q = q - (q @ a) * a
    return float(np.arctan2(np.cross(p, q) @ a, p @ q))


def base_dihedrals(frame: MeshFrame) -> np.ndarray:
    """Measured exterior angles at the base edges, as ``(phi, psi1, theta, psi2)``."""
    V = frame.vertices
    chi = np.empty(4)
    for i in range(4):
        j = (i + 1) % 4
        e = V[j] - V[i]
        e_hat = e / np.linalg.norm(e)
        out_base = _turn_in_plane(e_hat, -np.pi / 2)
        tip = V[4 + 2 * i] - V[i]
        chi[i] = signed_dihedral(e, out_base, tip)
    out = np.empty(4)
    out[list(EDGE_ANGLE)] = np.mod(chi, 2 * np.pi)
    return out


def wing_edge_angles(frame: MeshFrame) -> np.ndarray:
    """Exterior angles at the eight ray edges, shape ``(4, 2)``.

    Column 0 is the edge shared by the triangle at ``A_i`` and the wing on
    ``A_i A_{i+1}``; column 1 the edge shared with the wing on ``A_{i-1} A_i``.
    A value of 0 means the two faces are coplanar and unfolded, pi means folded
    onto each other.
    """
    V = frame.vertices
    out = np.empty((4, 2))
    for i in range(4):
        A = V[i]
        rn, rp = V[4 + 2 * i] - A, V[5 + 2 * i] - A
        en, ep = V[(i + 1) % 4] - A, V[(i - 1) % 4] - A
        out[i, 0] = np.mod(np.pi - signed_dihedral(rn, en, rp), 2 * np.pi)
        out[i, 1] = np.mod(np.pi - signed_dihedral(rp, ep, rn), 2 * np.pi)
    return out


# flattening partners found by construction: base angle and ray edges (vertex, column)
FLAT_EDGES = {
    "theta": ((0, 1), (1, 0)),
    "psi2": ((0, 0), (3, 1)),
}


def _edges(frame: MeshFrame) -> np.ndarray:
    E = set()
    for f in frame.faces:
        for a, b in zip(f, f[1:] + f[:1]):
            E.add((min(a, b), max(a, b)))
    E = np.array(sorted(E))
    return np.linalg.norm(frame.vertices[E[:, 0]] - frame.vertices[E[:, 1]], axis=1)


def _face_angles(frame: MeshFrame) -> np.ndarray:
    out = []
    V = frame.vertices
    for f in frame.faces:
        n = len(f)
        for k in range(n):
            p, a, b = V[f[k]], V[f[k - 1]], V[f[(k + 1) % n]]
            u, v = a - p, b - p
            out.append(np.arctan2(np.linalg.norm(np.cross(u, v)), u @ v))
    return np.array(out)


def face_planarity(frame: MeshFrame) -> float:
    worst = 0.0
    V = frame.vertices
    for f in frame.faces:
        if len(f) < 4:
            continue
        P = V[f] - V[f].mean(axis=0)
        worst = max(worst, np.linalg.svd(P, compute_uv=False)[-1])
    return float(worst)


def verify_isometry(frames: list, tol: float = 1e-8) -> dict:
    L = np.array([_edges(f) for f in frames])
    ang = np.array([_face_angles(f) for f in frames])
    dl = float(np.max(L.max(axis=0) - L.min(axis=0)))
    da = float(np.max(ang.max(axis=0) - ang.min(axis=0)))
    plan = max(face_planarity(f) for f in frames)
    return {
        "edge_length_dev": dl,
        "face_angle_dev": da,
        "planarity": plan,
        "passed": dl <= tol and da <= tol and plan <= tol,
    }


def write_obj(path, frame: MeshFrame) -> None:
    with open(path, "w") as fh:
        fh.write(f"# t={frame.t:.12g} branch={frame.branch}\n")
        for v in frame.vertices:
            fh.write("v {:.9f} {:.9f} {:.9f}\n".format(*v))
        for f in frame.faces:
            fh.write("f " + " ".join(str(i + 1) for i in f) + "\n")


def write_frames(outdir, frames: list) -> list:
    """Write ``frame_0001.obj`` ... and ``manifest.csv``; returns the OBJ paths."""
    os.makedirs(outdir, exist_ok=True)
    paths = []
    with open(os.path.join(outdir, "manifest.csv"), "w") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["frame", "t", "branch", "phi", "psi1", "theta", "psi2"])
        for n, fr in enumerate(frames, start=1):
            p = os.path.join(outdir, f"frame_{n:04d}.obj")
            write_obj(p, fr)
            paths.append(p)
            w.writerow([n, f"{fr.t:.12g}", fr.branch, *(f"{a:.12g}" for a in fr.dihedrals)])
    return paths
