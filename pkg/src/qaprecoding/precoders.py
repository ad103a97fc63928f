"""Infinite-resolution precoders, receive scalings and the quantize-then-rescale baseline."""

from __future__ import annotations

import numpy as np

from .model import SystemInstance
from .quantizer import GaussianSource, QuantizerSpec, make_quantizer, optimize_step_size, \
    quantize_complex_matrix

__all__ = [
    "DegenerateQuantizationError",
    "beta_opt",
    "beta_wf",
    "mrt_precoder",
    "quantization_unaware_precoder",
    "quantizer_for",
    "wf_precoder",
]


class DegenerateQuantizationError(ValueError):
    """The quantized precoder is all zeros and cannot be rescaled to power ``q``."""


def _regularized_inverse(inst: SystemInstance) -> np.ndarray:
    H = inst.H
    A = H @ H.conj().T + (inst.K * inst.N0 / inst.q) * np.eye(inst.K)
    return np.linalg.inv(A)


def wf_precoder(inst: SystemInstance) -> np.ndarray:
    """Wiener filter precoder scaled to full power ``q``.

    ``W = H^H (H H^H + K N0/q I)^-1`` followed by ``sqrt(q / ||W||_F^2)``.
    """
    W = inst.H.conj().T @ _regularized_inverse(inst)
    power = np.vdot(W, W).real
    if not power > 0:
        raise np.linalg.LinAlgError("Wiener filter precoder vanished (all-zero channel?)")
    return np.sqrt(inst.q / power) * W


def mrt_precoder(inst: SystemInstance) -> np.ndarray:
    """Maximum ratio transmission, ``P = c H^H`` with ``||P||_F^2 = q``."""
    power = np.vdot(inst.H, inst.H).real
    if power == 0:
        raise ValueError("MRT is undefined for an all-zero channel")
    return np.sqrt(inst.q / power) * inst.H.conj().T


def beta_wf(inst: SystemInstance) -> float:
    """Receive scaling that matches the Wiener filter precoder (real, positive)."""
    Ai = _regularized_inverse(inst)
    B = Ai @ inst.H
    return float(np.sqrt(np.vdot(B, B).real / inst.q))


def beta_opt(inst: SystemInstance, P) -> complex:
    """MSE-optimal common receive scaling for a given precoder.

    ``tr(P^H H^H) / (tr(P^H H^H H P) + K N0)``
    """
    P = inst.check_precoder(P)
    G = inst.H @ P
    denom = np.vdot(G, G).real + inst.K * inst.N0
    if denom == 0:
        raise ZeroDivisionError("beta_opt is singular for P = 0 and N0 = 0")
    return complex(np.conj(np.trace(G)) / denom)


def quantizer_for(inst: SystemInstance, L: int) -> QuantizerSpec:
    """Quantizer whose step is optimal for CN(0, q/M) inputs.

    The per-antenna Gaussian assumption gives a per-real-dimension variance
    of ``q / (2M)``.
    """
    delta, _ = optimize_step_size(L, GaussianSource(inst.q / (2 * inst.M)))
    return make_quantizer(L, delta)


def quantization_unaware_precoder(inst: SystemInstance, spec: QuantizerSpec, W=None) -> np.ndarray:
    """Quantize an infinite-resolution precoder and rescale it to power ``q``.

    Parameters
    ----------
    inst : SystemInstance
    spec : QuantizerSpec
    W : ndarray, optional
        Precoder to quantize. Defaults to the Wiener filter precoder.

    Returns
    -------
    P : ndarray, shape (M, K)
        ``alpha * Q(W)`` with ``alpha = sqrt(q / ||Q(W)||_F^2)``.
    """
    if W is None:
        W = wf_precoder(inst)
    W = inst.check_precoder(W)
    P_hat = quantize_complex_matrix(spec, W)
    power = np.vdot(P_hat, P_hat).real
    if power == 0:
        raise DegenerateQuantizationError("quantized precoder is identically zero")
    return np.sqrt(inst.q / power) * P_hat
