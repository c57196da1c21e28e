"""Linear predictive analysis/synthesis.

A frame s(n) is modeled as s(n) = sum_i c(i) s(n-i) + e(n); the analysis
polynomial is A(z) = 1 - sum_i c(i) z^-i and synthesis runs 1/A(z) on the
residual e(n). Coefficients come from the autocorrelation method via the
Levinson-Durbin recursion, which keeps A(z) minimum-phase.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.signal as sps


@dataclass(eq=False)
class LpcModel:
    """Prediction coefficients, residual, and error energy for one frame."""

    coeffs: np.ndarray
    order: int
    residual: np.ndarray
    gain: float


def autocorrelate(samples: np.ndarray, max_lag: int) -> np.ndarray:
    """Biased autocorrelation r(tau) = sum_n s(n) s(n+tau), tau = 0..max_lag."""
    x = np.asarray(samples, dtype=np.float64)
    if len(x) <= max_lag:
        raise ValueError(f"frame length {len(x)} must exceed max_lag {max_lag}")
    r = np.empty(max_lag + 1)
    for tau in range(max_lag + 1):
        r[tau] = np.dot(x[: len(x) - tau], x[tau:])
    return r


def levinson_durbin(r: np.ndarray, order: int) -> tuple[np.ndarray, float]:
    """Solve the Toeplitz normal equations by the Levinson-Durbin recursion.

    Returns (coeffs, gain) where coeffs are c(1..order) in the convention
    A(z) = 1 - sum c(i) z^-i and gain is the final prediction-error energy.
    If a reflection coefficient reaches magnitude 1 the recursion stops at
    the last stable order and the remaining coefficients are zero.
    """
    r = np.asarray(r, dtype=np.float64)
    if r[0] <= 0.0:
        raise ValueError("r(0) must be positive (silent frame)")
    if order > len(r) - 1:
        raise ValueError(f"order {order} needs at least {order + 1} autocorrelation lags")

    a = np.zeros(order + 1)
    a[0] = 1.0
    err = r[0]
    for i in range(1, order + 1):
        acc = r[i] + np.dot(a[1:i], r[i - 1 : 0 : -1])
        k = -acc / err
        if not np.isfinite(k) or abs(k) >= 1.0:
            warnings.warn(
                f"reflection coefficient magnitude >= 1 at order {i}; "
                f"falling back to order {i - 1}",
                RuntimeWarning,
                stacklevel=2,
            )
            break
        prev = a[1:i].copy()
        a[1:i] = prev + k * prev[::-1]
        a[i] = k
        err *= 1.0 - k * k
    return -a[1:], float(err)


def inverse_filter(samples: np.ndarray, coeffs: np.ndarray) -> np.ndarray:
    """Residual e(n) = s(n) - sum c(i) s(n-i), zero initial state."""
    a = np.concatenate(([1.0], -np.asarray(coeffs, dtype=np.float64)))
    return sps.lfilter(a, [1.0], np.asarray(samples, dtype=np.float64))


def synthesis_filter(residual: np.ndarray, coeffs: np.ndarray) -> np.ndarray:
    """All-pole resynthesis s(n) = e(n) + sum c(i) s(n-i), zero initial state.

    Exact inverse of inverse_filter. Raises ValueError for an unstable
    coefficient set (pole on or outside the unit circle).
    """
    a = np.concatenate(([1.0], -np.asarray(coeffs, dtype=np.float64)))
    if len(a) > 1:
        roots = np.roots(a)
        if roots.size and np.max(np.abs(roots)) >= 1.0 + 1e-9:
            raise ValueError("unstable synthesis filter: pole outside the unit circle")
    return sps.lfilter([1.0], a, np.asarray(residual, dtype=np.float64))


def analyze(samples: np.ndarray, order: int) -> LpcModel:
    """Full LP analysis of one frame: coefficients, gain, and residual."""
    r = autocorrelate(samples, order)
    coeffs, gain = levinson_durbin(r, order)
    return LpcModel(coeffs, order, inverse_filter(samples, coeffs), gain)
