"""Real-valued bounded-integer program for MSE-optimal lattice precoders.

For a fixed receive scaling ``beta`` the precoder ``P`` minimizing the MSE
solves::

    min  tr(P^H H^H H P - (1/b*) H P - ((1/b*) H P)^H)   s.t. ||P||_F^2 <= q

Vectorizing ``a = vec(P)`` (column-major) and stacking real and imaginary
parts gives ``a_R^T V_R a_R - 2 c_R^T a_R`` with ``||a_R||^2 <= q`` and every
entry of ``a_R`` a quantizer label.  The MSE is recovered as
``|beta|^2 * objective + K (|beta|^2 N0 + 1)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from ..model import SystemInstance
from ..quantizer import QuantizerSpec

__all__ = [
    "RealQuadraticProgram",
    "build_real_program",
    "embed",
    "mse_from_objective",
    "trace_objective",
    "unembed",
    "vector_objective",
]


def embed(P) -> np.ndarray:
    """``[Re vec(P); Im vec(P)]`` with column-major vectorization."""
    a = np.asarray(P, dtype=complex).reshape(-1, order="F")
    return np.concatenate([a.real, a.imag])


def unembed(a_R, M: int, K: int) -> np.ndarray:
    """Inverse of :func:`embed`."""
    a_R = np.asarray(a_R, dtype=float)
    n = M * K
    if a_R.shape != (2 * n,):
        raise ValueError(f"expected a vector of length {2 * n}, got shape {a_R.shape}")
    return (a_R[:n] + 1j * a_R[n:]).reshape((M, K), order="F")


def trace_objective(inst: SystemInstance, P, beta: complex) -> float:
    """Matrix (trace) form of the lattice objective."""
    P = inst.check_precoder(P)
    G = inst.H @ P
    lin = G / np.conj(beta)
    val = np.trace(P.conj().T @ inst.H.conj().T @ G - lin - lin.conj().T)
    return float(val.real)


def vector_objective(inst: SystemInstance, P, beta: complex) -> float:
    """Vectorized form ``a^H (I_K kron H^H H) a - h^T a - (h^T a)^*``."""
    P = inst.check_precoder(P)
    a = P.reshape(-1, order="F")
    h = (inst.H.T / np.conj(beta)).reshape(-1, order="F")
    gram = np.kron(np.eye(inst.K), inst.H.conj().T @ inst.H)
    ha = h @ a
    return float((np.vdot(a, gram @ a) - ha - np.conj(ha)).real)


def mse_from_objective(inst: SystemInstance, objective: float, beta: complex) -> float:
    b2 = abs(beta) ** 2
    return float(b2 * objective + inst.K * (b2 * inst.N0 + 1.0))


@dataclass(frozen=True, eq=False)
class RealQuadraticProgram:
    """``min a^T V a - 2 c^T a`` over labels ``a = delta (x - (L-1)/2)``, ``||a||^2 <= q``.

    ``x`` ranges over integers in ``[0, L-1]``.
    """

    V: np.ndarray
    c: np.ndarray
    q: float
    delta: float
    levels: int
    feas_tol: float = field(default=None)

    def __post_init__(self):
        V = np.array(self.V, dtype=float)
        c = np.array(self.c, dtype=float).ravel()
        n = c.shape[0]
        if V.shape != (n, n):
            raise ValueError(f"V must be {n} x {n}, got {V.shape}")
        if not np.allclose(V, V.T, rtol=0, atol=1e-12 * max(1.0, np.abs(V).max())):
            raise ValueError("V must be symmetric")
        V = 0.5 * (V + V.T)
        if self.q <= 0 or self.delta <= 0 or self.levels < 2:
            raise ValueError("need q > 0, delta > 0 and at least two levels")
        V.setflags(write=False)
        c.setflags(write=False)
        object.__setattr__(self, "V", V)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "q", float(self.q))
        object.__setattr__(self, "delta", float(self.delta))
        object.__setattr__(self, "levels", int(self.levels))
        if self.feas_tol is None:
            object.__setattr__(self, "feas_tol", 1e-12 * max(1.0, self.q))

    @property
    def n(self) -> int:
        return self.c.shape[0]

    @property
    def mid(self) -> float:
        return (self.levels - 1) / 2.0

    @cached_property
    def labels(self) -> np.ndarray:
        return self.delta * (np.arange(self.levels) - self.mid)

    @cached_property
    def lipschitz(self) -> float:
        """Largest eigenvalue of the Hessian ``2 V``."""
        return float(2.0 * max(np.linalg.eigvalsh(self.V)[-1], 0.0))

    @property
    def min_norm_sq(self) -> float:
        """Smallest ``||a||^2`` over the lattice (every entry at the label nearest zero)."""
        return self.n * float(np.min(self.labels**2))

    def to_a(self, x) -> np.ndarray:
        return self.delta * (np.asarray(x, dtype=float) - self.mid)

    def to_x(self, a) -> np.ndarray:
        """Continuous lattice coordinates of ``a``; integral on the lattice."""
        return np.asarray(a, dtype=float) / self.delta + self.mid

    def objective(self, a) -> float:
        a = np.asarray(a, dtype=float)
        return float(a @ self.V @ a - 2.0 * self.c @ a)

    def is_feasible(self, a) -> bool:
        a = np.asarray(a, dtype=float)
        return bool(a @ a <= self.q + self.feas_tol)


def build_real_program(inst: SystemInstance, beta: complex, spec: QuantizerSpec) -> RealQuadraticProgram:
    """Assemble ``V_R`` and ``c_R`` for the instance, receive scaling and quantizer."""
    if beta == 0 or not np.isfinite(beta):
        raise ValueError("beta must be finite and nonzero")
    K = inst.K
    gram = np.kron(np.eye(K), inst.H.conj().T @ inst.H)
    V = np.block([[gram.real, -gram.imag], [gram.imag, gram.real]])
    h = (inst.H.T / np.conj(beta)).reshape(-1, order="F")
    # c_R^T a_R must equal Re(h^T a), hence the sign on the imaginary block
    c = np.concatenate([h.real, -h.imag])
    return RealQuadraticProgram(V, c, inst.q, spec.step, spec.levels)
