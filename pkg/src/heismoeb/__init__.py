"""Heisenberg-group boundaries of hyperbolic spaces: gauges, Moebius maps and metric rigidity checks."""

__version__ = "0.1.0"

from .algebra import KNum, KVector
from .heisenberg import INF, HPoint, koranyi_dist, koranyi_gauge, origin, point
from .metrics import CCH1, CustomGauge, EuclideanR, KoranyiPower, estimate_alpha_beta
from .moebius import MoebiusMap, cross_ratio, cross_ratio_pair

__all__ = [
    "CCH1",
    "CustomGauge",
    "EuclideanR",
    "HPoint",
    "INF",
    "KNum",
    "KVector",
    "KoranyiPower",
    "MoebiusMap",
    "cross_ratio",
    "cross_ratio_pair",
    "estimate_alpha_beta",
    "koranyi_dist",
    "koranyi_gauge",
    "origin",
    "point",
]
