"""Numerical checks of convexity inequalities for Gaussian measure."""

from .conic_volumes import ConicProfile, PolyhedralCone, dual_cone, estimate_profile
from .distributions import ScalarDistribution
from .expsum_lab import ExpSum, count_zeros, fit_two_zeros
from .gauss_core import SeededStream
from .mgf_convexity import lambda_profile
from .renyi_div import RelativeDensity, renyi_divergence
from .transport_char import concavity_test, gaussian_transport_map
from .wills_functional import ConvexBody, f_K, wills_mc

__all__ = [
    "ConicProfile", "ConvexBody", "ExpSum", "PolyhedralCone", "RelativeDensity", "ScalarDistribution",
    "SeededStream", "concavity_test", "count_zeros", "dual_cone", "estimate_profile", "f_K",
    "fit_two_zeros", "gaussian_transport_map", "lambda_profile", "renyi_divergence", "wills_mc",
]
