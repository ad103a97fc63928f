"""Bounded-integer quadratic program behind quantization-aware precoding."""

from .bnb import SolveResult, SolverConfig, Status, branch_and_bound, brute_force_solve, improve_point
from .dump import DUMP_FORMAT, dump_solution, dumps_solution, load_solution, loads_solution
from .precoder import quantization_aware_precoder
from .program import (
    RealQuadraticProgram,
    build_real_program,
    embed,
    mse_from_objective,
    trace_objective,
    unembed,
    vector_objective,
)
from .relaxation import Relaxation, project_box_ball, solve_relaxation

__all__ = [
    "DUMP_FORMAT",
    "RealQuadraticProgram",
    "Relaxation",
    "SolveResult",
    "SolverConfig",
    "Status",
    "branch_and_bound",
    "brute_force_solve",
    "build_real_program",
    "dump_solution",
    "dumps_solution",
    "embed",
    "improve_point",
    "load_solution",
    "loads_solution",
    "mse_from_objective",
    "project_box_ball",
    "quantization_aware_precoder",
    "solve_relaxation",
    "trace_objective",
    "unembed",
    "vector_objective",
]
