"""Numerical isoperimetry for the double-Gaussian density on the line and plane."""

from .density import DoubleGaussianDensity, tail_quantile
from .line import (
    BoundaryConfiguration,
    StabilityResult,
    ray_for_mass,
    score,
    second_variation_test,
    verify_rays_optimal,
)
from .oracle import OracleConfig, brute_force_minimum, profile_table
from .plane import PlaneDensity, PlaneLine, compare_lines, line_generalized_curvature
from .report import VerificationReport
from .stationary import CandidateType, classify_candidates, inflection_point

__all__ = [
    "BoundaryConfiguration",
    "CandidateType",
    "DoubleGaussianDensity",
    "OracleConfig",
    "PlaneDensity",
    "PlaneLine",
    "StabilityResult",
    "VerificationReport",
    "brute_force_minimum",
    "classify_candidates",
    "compare_lines",
    "inflection_point",
    "line_generalized_curvature",
    "profile_table",
    "ray_for_mass",
    "score",
    "second_variation_test",
    "tail_quantile",
    "verify_rays_optimal",
]
