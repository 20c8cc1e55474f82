"""Quantum bottleneck solvers: evaluation, random search, rate curves, fixed points."""

from .benchmark import DephasingReport, analytic_dephasing_benchmark
from .curve import ConvexityReport, CurvePoint, RateCurve, convexity_check, default_grid, rate_curve
from .instance import Evaluation, ProblemInstance, build_instance, evaluate, evaluate_batch, evaluate_choi
from .lagrangian import (
    FixedPointDiagnostics,
    distortion_operator,
    fixed_point_solve,
    lagrangian,
    lagrangian_gradient,
    multiplier_estimate,
)
from .search import SearchResult, mutate_channel, random_channel, random_search, search

__all__ = [
    "ConvexityReport",
    "CurvePoint",
    "DephasingReport",
    "Evaluation",
    "FixedPointDiagnostics",
    "ProblemInstance",
    "RateCurve",
    "SearchResult",
    "analytic_dephasing_benchmark",
    "build_instance",
    "convexity_check",
    "default_grid",
    "distortion_operator",
    "evaluate",
    "evaluate_batch",
    "evaluate_choi",
    "fixed_point_solve",
    "lagrangian",
    "lagrangian_gradient",
    "multiplier_estimate",
    "mutate_channel",
    "random_channel",
    "random_search",
    "rate_curve",
    "search",
]
