"""Norms, filtrations and geodesic rays on section rings, with a toric testbed on P^1."""

__version__ = "0.1.0"

from .hermlab import HermNorm, PolyhedralNorm, dp_distance, geodesic, log_spectrum  # noqa: E402
from .filtrations import Filtration, dp_filtrations, joint_diagonalize  # noqa: E402
from .rays import HermRay, chordal_slope, chordal_trace  # noqa: E402
from .secring import MetricOnL, MonomialFiltration, fubini_study, hilb_k  # noqa: E402

__all__ = [
    "HermNorm",
    "PolyhedralNorm",
    "dp_distance",
    "geodesic",
    "log_spectrum",
    "Filtration",
    "dp_filtrations",
    "joint_diagonalize",
    "HermRay",
    "chordal_slope",
    "chordal_trace",
    "MetricOnL",
    "MonomialFiltration",
    "fubini_study",
    "hilb_k",
]
