"""Quantization-aware precoder: the MSE-optimal point of the label lattice."""

from __future__ import annotations

import numpy as np

from ..model import SystemInstance
from ..precoders import beta_opt, beta_wf, wf_precoder
from ..quantizer import QuantizerSpec, quantize_indices
from .bnb import SolveResult, SolverConfig, branch_and_bound
from .program import build_real_program, embed, mse_from_objective, unembed

__all__ = ["quantization_aware_precoder"]


def quantization_aware_precoder(inst: SystemInstance, spec: QuantizerSpec,
                                cfg: SolverConfig = SolverConfig(),
                                ) -> tuple[np.ndarray, complex, SolveResult]:
    """Precoder on the quantizer alphabet minimizing the MSE for ``beta = beta_wf``.

    The quantized Wiener filter precoder (without rescaling) seeds the
    incumbent whenever it satisfies the power constraint, so the result is
    never worse than that point in MSE even if the search budget runs out.

    Returns
    -------
    P : ndarray, shape (M, K)
        Entries lie in ``labels x labels``; ``||P||_F^2 <= q``.
    beta : complex
        Receive scaling the program was built for.
    result : SolveResult
    """
    beta = beta_wf(inst)
    P, result = _solve_for_beta(inst, spec, cfg, beta)
    if cfg.refine_beta and result.feasible:
        beta2 = beta_opt(inst, P)
        P2, result2 = _solve_for_beta(inst, spec, cfg, beta2, start=result.x)
        prog = build_real_program(inst, beta, spec)
        if result2.feasible and (mse_from_objective(inst, build_real_program(inst, beta2, spec)
                                                    .objective(result2.a), beta2)
                                 < mse_from_objective(inst, prog.objective(result.a), beta)):
            return P2, beta2, result2
    return P, beta, result


def _solve_for_beta(inst, spec, cfg, beta, start=None):
    prog = build_real_program(inst, beta, spec)
    seeds = [quantize_indices(spec, embed(wf_precoder(inst)))]
    if start is not None:
        seeds.append(start)
    result = branch_and_bound(prog, cfg, start_points=seeds)
    if not result.feasible:
        raise RuntimeError(f"no lattice precoder satisfies the power constraint ({result.status})")
    return unembed(result.a, inst.M, inst.K), result
