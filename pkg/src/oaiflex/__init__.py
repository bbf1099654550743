"""Flexible Kokotsakis polyhedra of orthodiagonal anti-involutive type."""
from .errors import OAIError
from .flexion import Branch, flexion_elementary, reduce
from .planar import PolyhedronSpec, build_spec, deltas_to_xys, xys_to_deltas
from .sphquad import InvolutionFactors, SphericalQuad, involution_factors

__version__ = "0.1.0"

__all__ = [
    "Branch",
    "InvolutionFactors",
    "OAIError",
    "PolyhedronSpec",
    "SphericalQuad",
    "build_spec",
    "deltas_to_xys",
    "flexion_elementary",
    "involution_factors",
    "reduce",
    "xys_to_deltas",
]
