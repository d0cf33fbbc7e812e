"""
Toric Geodesics

Discrete workbench for geodesic rays of toric psh potentials: potentials are
stored by their dual symbols on a polytope grid, and every construction
(segments, cutoff rays, envelopes, test-curve rays) is checked against an
independent second path.
"""

__version__ = "1.0.0"
__author__ = "FDU OS Course Group"

# Modules are imported individually (``from src.rays import build_ray``)
__all__ = [
    "convex_core",
    "toric_model",
    "zoo",
    "energy",
    "geodesics",
    "rays",
    "envelopes",
    "rwn",
    "suites",
    "scenario",
]
