"""Sparse inhomogeneous random intersection graphs and their giant component."""

from .branching import predict, predict_giant_fraction, solve_extinction
from .dist import SizeDistribution, make_distribution, point_mass
from .graphgen import GraphParams, component_census, degree_census, sample_graph

__all__ = [
    "GraphParams",
    "SizeDistribution",
    "component_census",
    "degree_census",
    "make_distribution",
    "point_mass",
    "predict",
    "predict_giant_fraction",
    "sample_graph",
    "solve_extinction",
]
__version__ = "0.1.0"
