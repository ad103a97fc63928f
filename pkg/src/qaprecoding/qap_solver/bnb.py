"""Branch-and-bound over the label lattice, plus an exhaustive oracle."""

from __future__ import annotations

import heapq
import itertools
import time
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import _kernels
from .program import RealQuadraticProgram

__all__ = [
    "SolveResult",
    "SolverConfig",
    "Status",
    "branch_and_bound",
    "brute_force_solve",
    "improve_point",
]

BRUTE_FORCE_LIMIT = 10**7


class Status(str, Enum):
    OPTIMAL = "optimal"
    TIME_LIMIT = "time-limit-incumbent"
    NODE_LIMIT = "node-limit-incumbent"
    INFEASIBLE = "infeasible"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class SolverConfig:
    """Branch-and-bound settings.

    ``node_limit`` is the deterministic budget; ``time_limit`` (seconds)
    depends on the machine and is best kept for interactive use.
    """

    gap_tolerance: float = 1e-9
    rel_gap: float = 0.0
    time_limit: float | None = None
    node_limit: int | None = None
    node_selection: str = "best-first"
    branching: str = "most-fractional"
    max_open_nodes: int = 200_000
    relax_max_iter: int = 5000
    relax_tol: float = 1e-9
    pair_moves: bool = True
    refine_beta: bool = False
    record_trace: bool = False

    def __post_init__(self):
        if self.gap_tolerance <= 0 or self.relax_tol <= 0 or self.rel_gap < 0:
            raise ValueError("tolerances must be positive")
        if self.node_selection not in ("best-first", "depth-first"):
            raise ValueError(f"unknown node selection {self.node_selection!r}")
        if self.branching != "most-fractional":
            raise ValueError(f"unknown branching rule {self.branching!r}")
        if self.time_limit is not None and self.time_limit <= 0:
            raise ValueError("time_limit must be positive")
        if self.node_limit is not None and self.node_limit < 1:
            raise ValueError("node_limit must be >= 1")


@dataclass
class SolveResult:
    x: np.ndarray | None
    a: np.ndarray | None
    objective: float
    status: Status
    lower_bound: float
    nodes_explored: int = 0
    relaxation_solves: int = 0
    wall_time: float = 0.0
    incumbent_trace: list = field(default_factory=list)
    node_trace: list = field(default_factory=list)

    @property
    def feasible(self) -> bool:
        return self.x is not None

    @property
    def gap(self) -> float:
        return self.objective - self.lower_bound


def improve_point(prog: RealQuadraticProgram, a, pair_moves: bool = True):
    """Round ``a`` to the lattice, repair the power constraint and polish locally.

    Returns ``(x, objective)`` or ``(None, inf)`` when no lattice point fits
    in the ball.
    """
    q = prog.q + prog.feas_tol
    x, ok = _kernels.round_and_repair(np.asarray(a, dtype=float), prog.delta, prog.mid,
                                      prog.levels, q)
    if not ok:
        return None, np.inf
    f = _kernels.local_search(prog.V, prog.c, x, prog.delta, prog.mid, prog.levels, q,
                              pair_moves, 100_000)
    return x, float(f)


class _Incumbent:
    def __init__(self, prog, cfg, trace):
        self.prog = prog
        self.cfg = cfg
        self.x = None
        self.value = np.inf
        self.trace = trace

    def offer(self, x, value, node):
        if x is not None and value < self.value:
            self.x = np.array(x, dtype=np.int64)
            self.value = float(value)
            self.trace.append((node, self.value))

    def cutoff(self):
        if self.x is None:
            return np.inf
        return self.value - max(self.cfg.gap_tolerance, self.cfg.rel_gap * abs(self.value))


def _branch_index(xr, lo, hi):
    free = lo < hi
    frac = np.abs(xr - np.floor(xr) - 0.5)
    frac = np.where(free, frac, np.inf)
    i = int(np.argmin(frac))
    return i if free[i] else -1


def branch_and_bound(prog: RealQuadraticProgram, cfg: SolverConfig = SolverConfig(),
                     start_points=()) -> SolveResult:
    """Globally minimize the lattice program.

    Nodes carry integer bounds on every lattice coordinate.  Each node's
    bound comes from the box ∩ ball relaxation, incumbents from rounding
    the relaxed point, and the most fractional coordinate is split into
    ``x_i <= floor`` / ``x_i >= floor + 1``.  A node is pruned when its
    bound reaches the incumbent minus the gap tolerance.

    Parameters
    ----------
    prog : RealQuadraticProgram
    cfg : SolverConfig
    start_points : iterable of array_like
        Candidate lattice points (integer coordinates) used as initial
        incumbents when feasible.
    """
    t0 = time.perf_counter()
    n, L, mid, delta = prog.n, prog.levels, prog.mid, prog.delta
    q = prog.q + prog.feas_tol
    inc_trace = []
    inc = _Incumbent(prog, cfg, inc_trace)
    node_trace = []

    def finish(status, lb, nodes, solves):
        x = inc.x
        a = prog.to_a(x) if x is not None else None
        if x is not None:
            lb = min(lb, inc.value)
        return SolveResult(x, a, inc.value, status, lb, nodes, solves,
                           time.perf_counter() - t0, inc_trace, node_trace)

    if prog.min_norm_sq > q:
        return finish(Status.INFEASIBLE, np.inf, 0, 0)

    for x0 in start_points:
        x0 = np.asarray(x0, dtype=np.int64)
        if x0.shape == (n,) and np.all((x0 >= 0) & (x0 < L)) and prog.is_feasible(prog.to_a(x0)):
            inc.offer(x0, prog.objective(prog.to_a(x0)), 0)

    lip = prog.lipschitz or 1.0
    counter = itertools.count()
    heap = []
    stack = []
    depth_first = cfg.node_selection == "depth-first"
    lo0 = np.zeros(n, dtype=np.int64)
    hi0 = np.full(n, L - 1, dtype=np.int64)
    root = (-np.inf, next(counter), 0, lo0, hi0, np.zeros(n))
    (stack.append if depth_first else heap.append)(root)

    nodes = 0
    solves = 0
    status = Status.OPTIMAL
    while heap or stack:
        if cfg.time_limit is not None and time.perf_counter() - t0 > cfg.time_limit:
            status = Status.TIME_LIMIT
            break
        if cfg.node_limit is not None and nodes >= cfg.node_limit:
            status = Status.NODE_LIMIT
            break
        bound, _, depth, lo, hi, warm = stack.pop() if stack else heapq.heappop(heap)
        if bound >= inc.cutoff():
            continue
        nodes += 1
        alo = delta * (lo - mid)
        ahi = delta * (hi - mid)
        origin = np.clip(0.0, alo, ahi)
        if origin @ origin > q:
            continue
        if np.array_equal(lo, hi):
            a = alo
            inc.offer(lo, prog.objective(a), nodes)
            continue

        a, value, lb, _, _ = _kernels.apg(prog.V, prog.c, alo, ahi, q, warm, lip,
                                          cfg.relax_max_iter, cfg.relax_tol, inc.cutoff(), 10)
        solves += 1
        lb = max(lb, bound)
        if cfg.record_trace:
            node_trace.append({"node": nodes, "depth": depth, "bound": float(lb),
                               "incumbent": float(inc.value)})
        if lb >= inc.cutoff():
            continue
        x_h, f_h = improve_point(prog, a, cfg.pair_moves)
        inc.offer(x_h, f_h, nodes)
        if lb >= inc.cutoff():
            continue

        xr = prog.to_x(a)
        i = _branch_index(xr, lo, hi)
        if i < 0:
            continue
        split = int(np.clip(np.floor(xr[i]), lo[i], hi[i] - 1))
        down_hi = hi.copy()
        down_hi[i] = split
        up_lo = lo.copy()
        up_lo[i] = split + 1
        down = (lb, next(counter), depth + 1, lo, down_hi, a)
        up = (lb, next(counter), depth + 1, up_lo, hi, a)
        # explore the side nearer the relaxed point first when diving
        first, second = (up, down) if xr[i] - split > 0.5 else (down, up)
        if depth_first or len(heap) + len(stack) >= cfg.max_open_nodes:
            stack.append(second)
            stack.append(first)
        else:
            heapq.heappush(heap, first)
            heapq.heappush(heap, second)

    open_bounds = [node[0] for node in itertools.chain(heap, stack)]
    if status is Status.OPTIMAL:
        if inc.x is None:
            return finish(Status.INFEASIBLE, np.inf, nodes, solves)
        # every pruned node had a bound at or above the final cutoff
        lb = inc.cutoff()
    else:
        lb = min(open_bounds, default=inc.value)
    return finish(status, lb, nodes, solves)


def brute_force_solve(prog: RealQuadraticProgram, chunk: int = 1 << 16) -> SolveResult:
    """Enumerate every lattice point; ties go to the lexicographically smallest ``x``."""
    t0 = time.perf_counter()
    n, L = prog.n, prog.levels
    total = L**n
    if total > BRUTE_FORCE_LIMIT:
        raise ValueError(f"{L}^{n} lattice points exceed the brute-force limit {BRUTE_FORCE_LIMIT}")
    powers = L ** np.arange(n - 1, -1, -1, dtype=np.int64)
    labels = prog.labels
    q = prog.q + prog.feas_tol
    best_x, best_val = None, np.inf
    for start in range(0, total, chunk):
        idx = np.arange(start, min(start + chunk, total), dtype=np.int64)
        X = (idx[:, None] // powers) % L
        A = labels[X]
        vals = np.einsum("ij,jk,ik->i", A, prog.V, A) - 2.0 * A @ prog.c
        vals[np.einsum("ij,ij->i", A, A) > q] = np.inf
        m = vals.min()
        if not np.isfinite(m):
            continue
        tie = 1e-12 * (1.0 + abs(m))
        if m < best_val - tie:
            j = int(np.flatnonzero(vals <= m + tie)[0])
            best_x, best_val = X[j].copy(), float(vals[j])
    wall = time.perf_counter() - t0
    if best_x is None:
        return SolveResult(None, None, np.inf, Status.INFEASIBLE, np.inf, total, 0, wall)
    return SolveResult(best_x, prog.to_a(best_x), best_val, Status.OPTIMAL, best_val, total, 0, wall)
