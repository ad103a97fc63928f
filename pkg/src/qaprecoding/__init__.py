"""Quantization-aware MU-MIMO precoding over a limited fronthaul."""

from .evaluation import RateReport, SweepConfig, run_kl_tradeoff, run_sweep, sum_rate
from .model import RngSeed, SystemDims, SystemInstance, generate_channel, mse_closed_form, mse_monte_carlo
from .precoders import (
    DegenerateQuantizationError,
    beta_opt,
    beta_wf,
    mrt_precoder,
    quantization_unaware_precoder,
    quantizer_for,
    wf_precoder,
)
from .qap_solver import SolverConfig, Status, branch_and_bound, brute_force_solve, quantization_aware_precoder
from .quantizer import GaussianSource, QuantizerSpec, make_quantizer, optimize_step_size, quantize

__version__ = "0.1.0"

__all__ = [
    "DegenerateQuantizationError",
    "GaussianSource",
    "QuantizerSpec",
    "RateReport",
    "RngSeed",
    "SolverConfig",
    "Status",
    "SweepConfig",
    "SystemDims",
    "SystemInstance",
    "beta_opt",
    "beta_wf",
    "branch_and_bound",
    "brute_force_solve",
    "generate_channel",
    "make_quantizer",
    "mrt_precoder",
    "mse_closed_form",
    "mse_monte_carlo",
    "optimize_step_size",
    "quantization_aware_precoder",
    "quantization_unaware_precoder",
    "quantize",
    "quantizer_for",
    "run_kl_tradeoff",
    "run_sweep",
    "sum_rate",
    "wf_precoder",
]
