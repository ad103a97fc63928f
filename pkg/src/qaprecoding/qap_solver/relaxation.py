"""Continuous relaxation of the lattice program over a box intersected with the power ball."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .program import RealQuadraticProgram

__all__ = ["Relaxation", "project_box_ball", "solve_relaxation"]


def _as_bounds(lo, hi, n):
    lo = np.broadcast_to(np.asarray(lo, dtype=float), (n,)).copy()
    hi = np.broadcast_to(np.asarray(hi, dtype=float), (n,)).copy()
    if np.any(lo > hi):
        raise ValueError("empty box: some lo > hi")
    return lo, hi


def project_box_ball(y, lo, hi, q: float) -> np.ndarray:
    """Euclidean projection of ``y`` onto ``{z : lo <= z <= hi, ||z||^2 <= q}``.

    The projection is ``clip(y / (1 + lam), lo, hi)`` with the ball
    multiplier ``lam >= 0`` found by bisection; ``lam = 0`` when the box
    projection already lies in the ball.  The box must contain a point of
    the ball, i.e. ``||clip(0, lo, hi)||^2 <= q``.
    """
    y = np.asarray(y, dtype=float)
    lo, hi = _as_bounds(lo, hi, y.shape[0])
    if q <= 0:
        raise ValueError("q must be positive")
    origin = np.clip(0.0, lo, hi)
    if origin @ origin > q:
        raise ValueError("box does not intersect the ball")
    return _kernels.clip_scale_ball(y, lo, hi, float(q), 1.0)


@dataclass
class Relaxation:
    a: np.ndarray
    value: float
    lower_bound: float
    iterations: int
    converged: bool


def solve_relaxation(prog: RealQuadraticProgram, lo, hi, warm_start=None, *,
                     max_iter: int = 5000, tol: float = 1e-9, cutoff: float = np.inf,
                     check_every: int = 10) -> Relaxation:
    """Minimize ``a^T V a - 2 c^T a`` over ``lo <= a <= hi``, ``||a||^2 <= q``.

    Parameters
    ----------
    prog : RealQuadraticProgram
    lo, hi : array_like
        Box in label (``a``) coordinates.
    warm_start : array_like, optional
        Starting point; projected onto the feasible set first.
    max_iter : int
        Iteration budget of the accelerated projected gradient method.
    tol : float
        Relative gap between the iterate value and the certified bound at
        which the solve stops.
    cutoff : float
        Stop as soon as the bound reaches this value (used for pruning).

    Returns
    -------
    Relaxation
        ``lower_bound`` is a Frank-Wolfe certificate and never exceeds the
        true relaxed minimum, even when ``converged`` is False.
    """
    lo, hi = _as_bounds(lo, hi, prog.n)
    q = prog.q + prog.feas_tol
    origin = np.clip(0.0, lo, hi)
    if origin @ origin > q:
        raise ValueError("node box does not intersect the power ball")
    a0 = np.zeros(prog.n) if warm_start is None else np.asarray(warm_start, dtype=float)
    lip = prog.lipschitz
    a, value, lb, its, ok = _kernels.apg(
        prog.V, prog.c, lo, hi, q, a0, lip if lip > 0 else 1.0,
        int(max_iter), float(tol), float(cutoff), int(check_every),
    )
    return Relaxation(a, float(value), float(lb), int(its), bool(ok))
