"""Downlink MU-MIMO system model ``y = H P s + n``.

Channels are i.i.d. Rayleigh, data symbols are unit-power and the noise is
circularly-symmetric complex Gaussian with variance ``N0`` per UE.  This
module also evaluates the receiver MSE ``E||s - beta*y||^2`` in closed form
and by Monte Carlo simulation.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

__all__ = [
    "RngSeed",
    "SystemDims",
    "SystemInstance",
    "complex_normal",
    "generate_channel",
    "mse_closed_form",
    "mse_monte_carlo",
]


@dataclass(frozen=True)
class RngSeed:
    """Reproducible random stream identified by ``(seed, stream)``.

    Different stream ids give statistically independent generators, so a
    Monte Carlo trial can derive its stream from its index and the result
    does not depend on evaluation order.
    """

    seed: int = 0
    stream: int = 0

    def __post_init__(self):
        for name in ("seed", "stream"):
            value = getattr(self, name)
            if not 0 <= int(value) < 2**64:
                raise ValueError(f"{name} must be a 64-bit unsigned integer, got {value}")

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(entropy=int(self.seed), spawn_key=(int(self.stream),))
        return np.random.default_rng(ss)

    def child(self, stream: int) -> "RngSeed":
        return RngSeed(self.seed, stream)


@dataclass(frozen=True)
class SystemDims:
    """Number of BS antennas ``M`` and single-antenna users ``K``."""

    M: int
    K: int

    def __post_init__(self):
        if int(self.M) < 1 or int(self.K) < 1:
            raise ValueError(f"need M >= 1 and K >= 1, got M={self.M}, K={self.K}")
        if self.K > self.M:
            warnings.warn(
                f"K={self.K} users exceed M={self.M} antennas; spatial multiplexing "
                "is not supported by the channel rank",
                stacklevel=3,
            )


@dataclass(frozen=True, eq=False)
class SystemInstance:
    """One channel realization together with the physical constants.

    Parameters
    ----------
    H : ndarray, shape (K, M)
        Downlink channel.
    q : float
        Maximum transmit power, ``||P||_F^2 <= q``.
    N0 : float
        Noise variance at every UE.
    gamma : float
        Variance of the channel entries, only used to report the SNR.
    """

    H: np.ndarray
    q: float
    N0: float = 1.0
    gamma: float = 1.0

    def __post_init__(self):
        H = np.array(self.H, dtype=complex)
        if H.ndim != 2:
            raise ValueError(f"H must be a K x M matrix, got shape {H.shape}")
        if not np.all(np.isfinite(H)):
            raise ValueError("H contains non-finite entries")
        for name in ("q", "N0", "gamma"):
            value = float(getattr(self, name))
            if not (np.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be finite and positive, got {value}")
            object.__setattr__(self, name, value)
        H.setflags(write=False)
        object.__setattr__(self, "H", H)
        SystemDims(self.M, self.K)

    @property
    def K(self) -> int:
        return self.H.shape[0]

    @property
    def M(self) -> int:
        return self.H.shape[1]

    @property
    def dims(self) -> SystemDims:
        return SystemDims(self.M, self.K)

    @property
    def snr(self) -> float:
        """Common SNR ``q * gamma / N0`` (linear)."""
        return self.q * self.gamma / self.N0

    @classmethod
    def from_snr_db(cls, H, snr_db: float, N0: float = 1.0, gamma: float = 1.0):
        """Fix ``N0`` and ``gamma`` and pick ``q`` so that ``q*gamma/N0`` hits the SNR."""
        q = 10.0 ** (snr_db / 10.0) * N0 / gamma
        return cls(H, q=q, N0=N0, gamma=gamma)

    def check_precoder(self, P) -> np.ndarray:
        P = np.asarray(P, dtype=complex)
        if P.shape != (self.M, self.K):
            raise ValueError(f"precoder must have shape {(self.M, self.K)}, got {P.shape}")
        return P


def complex_normal(rng: np.random.Generator, shape, variance: float = 1.0) -> np.ndarray:
    """Draw CN(0, variance) samples (variance/2 per real dimension)."""
    scale = np.sqrt(variance / 2.0)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def generate_channel(dims: SystemDims, gamma: float = 1.0, rng: RngSeed = RngSeed()) -> np.ndarray:
    """Draw a K x M Rayleigh channel with i.i.d. CN(0, gamma) entries."""
    if not (np.isfinite(gamma) and gamma > 0):
        raise ValueError(f"gamma must be positive, got {gamma}")
    return complex_normal(rng.generator(), (dims.K, dims.M), gamma)


def mse_closed_form(inst: SystemInstance, P, beta: complex) -> float:
    """Exact receiver MSE for precoder ``P`` and common receive scaling ``beta``.

    Uses ``E[s s^H] = I`` and ``E[n n^H] = N0 I``::

        tr(|b|^2 P^H H^H H P - b H P - b* P^H H^H) + K (|b|^2 N0 + 1)
    """
    P = inst.check_precoder(P)
    if not np.isfinite(beta):
        raise ValueError("beta must be finite")
    G = inst.H @ P
    b2 = abs(beta) ** 2
    tr_gg = np.vdot(G, G).real
    cross = 2.0 * (beta * np.trace(G)).real
    return float(b2 * tr_gg - cross + inst.K * (b2 * inst.N0 + 1.0))


def mse_monte_carlo(inst: SystemInstance, P, beta: complex, trials: int,
                    rng: RngSeed = RngSeed()) -> tuple[float, float]:
    """Sample mean and standard error of ``||s - beta (H P s + n)||^2``.

    Symbols are drawn CN(0, I), which share the second-order statistics
    of any unit-power constellation.
    """
    P = inst.check_precoder(P)
    trials = int(trials)
    if trials < 1:
        raise ValueError("trials must be >= 1")
    gen = rng.generator()
    s = complex_normal(gen, (inst.K, trials))
    n = complex_normal(gen, (inst.K, trials), inst.N0)
    err = s - beta * (inst.H @ (P @ s) + n)
    samples = np.sum(np.abs(err) ** 2, axis=0)
    mean = float(samples.mean())
    if trials == 1:
        return mean, float("inf")
    return mean, float(samples.std(ddof=1) / np.sqrt(trials))
