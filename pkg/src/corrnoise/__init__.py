"""Correlated-noise DP-FTRL: noise-coefficient design, Toeplitz sensitivity,
asymptotic suboptimality, a convex-program bound and a simulation lab."""

__version__ = "0.1.0"

from .analysis import (ProblemParams, linreg_finf_lower, linreg_finf_upper, mean_finf, rate_table,
                       universal_floor)
from .coeffs import CoeffSeq, limiting_bmagsq, make_coeffs
from .convex_bound import ConvexClass, MultiplierSeq, alternating_minimization, optimize_lambda
from .engine import RunConfig, run, zcdp_to_eps
from .spectral import QuadratureSpec, Spectrum
from .toeplitz import sensitivity_T, sensitivity_inf

__all__ = [
    "CoeffSeq", "ConvexClass", "MultiplierSeq", "ProblemParams", "QuadratureSpec", "RunConfig", "Spectrum",
    "alternating_minimization", "limiting_bmagsq", "linreg_finf_lower", "linreg_finf_upper", "make_coeffs",
    "mean_finf", "optimize_lambda", "rate_table", "run", "sensitivity_T", "sensitivity_inf", "universal_floor",
    "zcdp_to_eps",
]
