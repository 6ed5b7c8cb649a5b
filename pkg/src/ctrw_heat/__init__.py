"""Continuous-time random walk master equation: kernels, strip solver, analysis."""

from .datum import InitialDatum, parse_datum
from .errors import (ConfigurationError, ConvergenceFailure, CTRWError, InvalidParameter,
                     InvalidState, NumericalFailure, VerificationFailure)
from .grid import DiscreteKernel, Grid, SpaceTimeField, convolve_slice, discretize_kernel, tail_weights
from .heat_ref import heat_solve, lemma_constant, lipschitz_rate_check, weierstrass
from .kernels import (KernelSpec, bump_product, closed_form_moment, compute_moments, heatball,
                      heatball_eval, jump_marginal, kernel_alpha, rescale, waiting_marginal)
from .solver import SolveReport, apply_T, prepare, solve, solve_strip

__version__ = "0.1.0"

__all__ = [
    "ConfigurationError", "ConvergenceFailure", "CTRWError", "DiscreteKernel", "Grid",
    "InitialDatum", "InvalidParameter", "InvalidState", "KernelSpec", "NumericalFailure",
    "SolveReport", "SpaceTimeField", "VerificationFailure", "apply_T", "bump_product",
    "closed_form_moment", "compute_moments", "convolve_slice", "discretize_kernel",
    "heat_solve", "heatball", "heatball_eval", "jump_marginal", "kernel_alpha",
    "lemma_constant", "lipschitz_rate_check", "parse_datum", "prepare", "rescale", "solve",
    "solve_strip", "tail_weights", "waiting_marginal", "weierstrass",
]
