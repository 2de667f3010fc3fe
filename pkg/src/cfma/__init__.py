"""Compute-forward multiple access (CFMA) rates for the two-user Gaussian MIMO MAC."""

from .model import (ChannelPair, CodingChoice, CovariancePair, RatePairResult,
                    CfmaError, InputError, NumericalError, cholesky_lower, det)
from .rates import achievable_pair, compute_M, equalizer_oracle, rate_first, rate_second
from .waterfill import iterative_waterfill, single_user_waterfill, input_covariances
from .polynomial import RealPolynomial, sturm_positive_root_exists
from .sumcap import check_sum_capacity, f_gamma_poly, g_gamma_poly

__all__ = [
    "ChannelPair", "CodingChoice", "CovariancePair", "RatePairResult",
    "CfmaError", "InputError", "NumericalError", "cholesky_lower", "det",
    "achievable_pair", "compute_M", "equalizer_oracle", "rate_first", "rate_second",
    "iterative_waterfill", "single_user_waterfill", "input_covariances",
    "RealPolynomial", "sturm_positive_root_exists",
    "check_sum_capacity", "f_gamma_poly", "g_gamma_poly",
]
