"""Weighted minimax and maximin node systems for sums of translates on the torus."""
from .fields import (
    PiecewiseField,
    example71_field,
    harmonic_step_field,
    tilde_field,
    zero_field,
)
from .kernels import Kernel, SmoothMode, log_sine, smooth, zero_kernel
from .solvers import (
    Certificate,
    SolveConfig,
    SolveResult,
    brute_force,
    smoothing_homotopy,
    solve_equioscillation,
    solve_maximin,
    solve_minimax,
    trace_mu,
)
from .sumtrans import Problem, arc_maxima, f_eval, F_eval, phi_star

__version__ = "0.1.0"

__all__ = [
    "Certificate",
    "F_eval",
    "Kernel",
    "PiecewiseField",
    "Problem",
    "SmoothMode",
    "SolveConfig",
    "SolveResult",
    "arc_maxima",
    "brute_force",
    "example71_field",
    "f_eval",
    "harmonic_step_field",
    "log_sine",
    "phi_star",
    "smooth",
    "smoothing_homotopy",
    "solve_equioscillation",
    "solve_maximin",
    "solve_minimax",
    "tilde_field",
    "trace_mu",
    "zero_field",
    "zero_kernel",
]
