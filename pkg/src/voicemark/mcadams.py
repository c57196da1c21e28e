"""The anonymization core: warp complex LPC pole angles by phi -> phi^alpha.

Per analysis sub-frame the signal is LPC-analyzed, the poles of 1/A(z) are
found, every complex pole's angle is raised to the McAdams coefficient
(magnitude untouched, conjugate symmetry preserved), the warped poles are
expanded back to coefficients, and the frame is resynthesized from the
original residual. Sub-frames are recombined by windowed overlap-add.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.signal as sps

from .audio_io import AudioBuffer
from .lpc import autocorrelate, levinson_durbin, inverse_filter

SILENCE_THRESHOLD = 1e-12  # r(0) below this: skip modification entirely
_RESIDUAL_TOL = 1e-8


class RootFindingError(ValueError):
    """Raised when polynomial roots cannot be computed to tolerance."""


@dataclass(eq=False)
class PoleSet:
    """Complex pole positions of an all-pole filter, conjugate-symmetric."""

    poles: np.ndarray
    order: int

    def __post_init__(self) -> None:
        self.poles = np.asarray(self.poles, dtype=complex).reshape(-1)


@dataclass
class McAdamsParams:
    """Anonymization parameters: warp exponent and LPC analysis framing."""

    alpha: float
    subframe_ms: float = 20.0
    hop_ms: float = 10.0
    order: int = 20

    def __post_init__(self) -> None:
        if self.alpha <= 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if not (0 < self.hop_ms <= self.subframe_ms):
            raise ValueError(f"need 0 < hop_ms <= subframe_ms, got {self.hop_ms}/{self.subframe_ms}")
        if self.order < 2:
            raise ValueError(f"order must be >= 2, got {self.order}")


@dataclass(eq=False)
class AnonymizationResult:
    """Anonymized audio plus a count of sub-frames passed through unmodified
    (silence or root-finder failure)."""

    audio: AudioBuffer
    frames_total: int
    frames_passed_through: int


def _monic(coeffs: np.ndarray) -> np.ndarray:
    return np.concatenate(([1.0], -np.asarray(coeffs, dtype=np.float64)))


def find_poles(coeffs: np.ndarray) -> PoleSet:
    """Roots of A(z) = 1 - sum c(i) z^-i via companion-matrix eigenvalues.

    Roots are Newton-polished and checked against the monic numerator
    z^M A(z); the z^-1 form itself diverges for roots near the origin, so
    the residual is evaluated on the monic polynomial.
    """
    monic = _monic(coeffs)
    order = len(monic) - 1
    if order < 1:
        raise ValueError("need at least one coefficient")
    roots = np.roots(monic)

    deriv = np.polyder(monic)
    for _ in range(2):
        num = np.polyval(monic, roots)
        den = np.polyval(deriv, roots)
        safe = np.abs(den) > 0
        roots = roots - np.where(safe, num / np.where(safe, den, 1.0), 0.0)

    residual = np.abs(np.polyval(monic, roots))
    if residual.size and residual.max() >= _RESIDUAL_TOL:
        raise RootFindingError(f"root residual {residual.max():.3e} exceeds {_RESIDUAL_TOL:.0e}")
    return PoleSet(roots, order)


def warp_poles(pole_set: PoleSet, alpha: float) -> PoleSet:
    """Raise each complex pole's angle to alpha; magnitudes and real poles
    are untouched and conjugate symmetry is preserved exactly.

    If the warped angle would reach pi the pole is left unmodified (keeps
    pole angles from aliasing across the negative real axis).
    """
    if alpha <= 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    out = np.array(pole_set.poles, dtype=complex)
    for i, p in enumerate(out):
        phi = np.angle(p)
        if p.imag == 0.0 or phi == 0.0 or abs(phi) == np.pi:
            continue
        new = abs(phi) ** alpha
        if new >= np.pi:
            continue
        q = abs(p) * complex(np.cos(new), np.sin(new))
        out[i] = q if phi > 0 else q.conjugate()
    return PoleSet(out, pole_set.order)


def poles_to_coeffs(pole_set: PoleSet) -> np.ndarray:
    """Expand a conjugate-symmetric pole set back to real coefficients c(i)."""
    monic = np.poly(pole_set.poles) if len(pole_set.poles) else np.array([1.0])
    if np.iscomplexobj(monic):
        residue = float(np.max(np.abs(monic.imag)))
        scale = max(1.0, float(np.max(np.abs(monic.real))))
        if residue > 1e-6 * scale:
            raise ValueError(f"imaginary residue {residue:.3e}: pole set is not conjugate-symmetric")
        monic = monic.real
    return -monic[1:]


def _warp_subframe(seg: np.ndarray, params: McAdamsParams) -> np.ndarray | None:
    """Process one sub-frame; None means 'pass through unchanged'."""
    r = autocorrelate(seg, params.order)
    if r[0] < SILENCE_THRESHOLD:
        return None
    coeffs, _ = levinson_durbin(r, params.order)
    try:
        poles = find_poles(coeffs)
    except (RootFindingError, np.linalg.LinAlgError):
        return None
    warped = poles_to_coeffs(warp_poles(poles, params.alpha))
    residual = inverse_filter(seg, coeffs)
    # warping preserves pole magnitudes, so the filter stays stable
    return sps.lfilter([1.0], _monic(warped), residual)


def anonymize(buffer: AudioBuffer, params: McAdamsParams) -> AnonymizationResult:
    """Anonymize a buffer sub-frame by sub-frame with Hann-windowed
    overlap-add; output length equals input length.

    Degenerate sub-frames (silence, too short for the LPC order, failed
    root finding) are passed through unchanged and counted in the result.
    """
    x = buffer.samples
    fs = buffer.sample_rate
    n = len(x)
    sub_len = int(round(params.subframe_ms * fs / 1000.0))
    hop = int(round(params.hop_ms * fs / 1000.0))
    if hop < 1 or sub_len < 2:
        raise ValueError("sub-frame/hop too short at this sample rate")
    window = sps.windows.hann(sub_len, sym=False)

    out = np.zeros(n)
    weight = np.zeros(n)
    total = passed = 0
    for start in range(0, n, hop):
        seg = x[start : start + sub_len]
        total += 1
        y = _warp_subframe(seg, params) if len(seg) > params.order else None
        if y is None:
            y = seg
            passed += 1
        w = window[: len(seg)]
        out[start : start + len(seg)] += y * w
        weight[start : start + len(seg)] += w

    nz = weight > 1e-12
    out[nz] /= weight[nz]
    return AnonymizationResult(AudioBuffer(out, fs), total, passed)
