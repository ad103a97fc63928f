"""Symmetric uniform quantizer and Gaussian step-size design.

With ``L`` levels and step ``delta`` the labels are
``delta * (z - (L-1)/2)`` for ``z = 0..L-1`` and the interior thresholds are
``delta * (z - L/2)`` for ``z = 1..L-1``.  Input ``x`` maps to label ``z``
when ``x`` lies in the half-open cell ``[t_z, t_{z+1})``, so with even ``L``
an exact zero maps to ``+delta/2``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import optimize, special

__all__ = [
    "GaussianSource",
    "QuantizerSpec",
    "gaussian_distortion",
    "make_quantizer",
    "optimize_step_size",
    "quantize",
    "quantize_complex_matrix",
    "quantize_indices",
    "quantize_scalar",
]


@dataclass(frozen=True)
class QuantizerSpec:
    levels: int
    step: float
    labels: np.ndarray = field(repr=False, compare=False)
    thresholds: np.ndarray = field(repr=False, compare=False)

    @property
    def bits(self) -> float:
        return float(np.log2(self.levels))

    @property
    def interior_thresholds(self) -> np.ndarray:
        return self.thresholds[1:-1]

    @property
    def min_abs_label(self) -> float:
        return float(np.min(np.abs(self.labels)))

    def __len__(self):
        return self.levels


@dataclass(frozen=True)
class GaussianSource:
    """Zero-mean real Gaussian input with the given variance."""

    variance: float

    def __post_init__(self):
        v = float(self.variance)
        if not (np.isfinite(v) and v > 0):
            raise ValueError(f"variance must be finite and positive, got {self.variance}")

    @property
    def std(self) -> float:
        return float(np.sqrt(self.variance))


def make_quantizer(L: int, delta: float) -> QuantizerSpec:
    """Build the ``L``-level uniform quantizer with step ``delta``."""
    if int(L) != L or L < 2:
        raise ValueError(f"need an integer L >= 2, got {L}")
    if not (np.isfinite(delta) and delta > 0):
        raise ValueError(f"step size must be positive, got {delta}")
    L = int(L)
    z = np.arange(L)
    labels = delta * (z - (L - 1) / 2.0)
    thresholds = np.empty(L + 1)
    thresholds[0], thresholds[-1] = -np.inf, np.inf
    thresholds[1:-1] = delta * (z[1:] - L / 2.0)
    labels.setflags(write=False)
    thresholds.setflags(write=False)
    return QuantizerSpec(L, float(delta), labels, thresholds)


def quantize_indices(spec: QuantizerSpec, x) -> np.ndarray:
    """Cell index ``z`` of every entry of the real array ``x``."""
    x = np.asarray(x, dtype=float)
    if np.isnan(x).any():
        raise ValueError("cannot quantize NaN")
    return np.searchsorted(spec.interior_thresholds, x, side="right")


def quantize(spec: QuantizerSpec, x) -> np.ndarray:
    """Quantize a real array elementwise."""
    return spec.labels[quantize_indices(spec, x)]


def quantize_scalar(spec: QuantizerSpec, x: float) -> float:
    return float(quantize(spec, x))


def quantize_complex_matrix(spec: QuantizerSpec, W) -> np.ndarray:
    """Quantize real and imaginary parts of ``W`` with the same alphabet."""
    W = np.asarray(W, dtype=complex)
    if not np.all(np.isfinite(W)):
        raise ValueError("cannot quantize non-finite entries")
    return quantize(spec, W.real) + 1j * quantize(spec, W.imag)


def gaussian_distortion(L: int, delta: float, variance: float = 1.0) -> float:
    """MSE ``E[(X - Q(X))^2]`` for ``X ~ N(0, variance)``.

    Each cell contributes ``E[X^2 1_c] - 2 l E[X 1_c] + l^2 P(c)``, all of
    which have closed forms in the Gaussian CDF and density.
    """
    spec = make_quantizer(L, delta)
    sigma = np.sqrt(variance)
    u = spec.thresholds / sigma
    cdf = special.ndtr(u)
    pdf = np.exp(-0.5 * np.square(u)) / np.sqrt(2 * np.pi)
    updf = np.zeros_like(u)
    finite = np.isfinite(u)
    updf[finite] = u[finite] * pdf[finite]

    prob = np.diff(cdf)
    first = sigma * (pdf[:-1] - pdf[1:])
    second = variance * (prob + updf[:-1] - updf[1:])
    lab = spec.labels
    return float(np.sum(second - 2 * lab * first + lab**2 * prob))


def optimize_step_size(L: int, source: GaussianSource = GaussianSource(1.0),
                       xtol: float = 1e-6) -> tuple[float, float]:
    """Step size minimizing the Gaussian distortion of an ``L``-level quantizer.

    A log-spaced scan over ``[1e-3, 10]`` standard deviations brackets the
    minimum and golden-section search refines it.

    Returns
    -------
    delta : float
    distortion : float
        ``gaussian_distortion(L, delta, source.variance)``
    """
    if int(L) != L or L < 2:
        raise ValueError(f"need an integer L >= 2, got {L}")
    # scale equivariance: optimize for unit variance, then rescale
    delta = _unit_optimal_step(int(L), float(xtol)) * source.std
    return delta, gaussian_distortion(L, delta, source.variance)


@lru_cache(maxsize=None)
def _unit_optimal_step(L: int, xtol: float) -> float:
    def cost(d):
        return gaussian_distortion(L, d, 1.0)

    grid = np.geomspace(1e-3, 10.0, 257)
    values = np.array([cost(d) for d in grid])
    i = int(np.clip(np.argmin(values), 1, len(grid) - 2))
    res = optimize.minimize_scalar(
        cost, bracket=(grid[i - 1], grid[i], grid[i + 1]), method="golden",
        options={"xtol": xtol},
    )
    return float(res.x)
