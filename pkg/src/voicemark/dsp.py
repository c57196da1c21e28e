"""Shared DSP primitives: framing, FIR band-pass filtering, power spectra,
peak normalization, and polyphase sample-rate conversion."""
from __future__ import annotations

from dataclasses import dataclass
from math import gcd

import numpy as np
import scipy.signal as sps

from .audio_io import AudioBuffer


@dataclass(eq=False)
class Frame:
    """One fixed-length analysis frame cut from a buffer."""

    samples: np.ndarray
    index: int
    start: int


@dataclass(eq=False)
class PowerSpectrum:
    """One-sided squared-magnitude spectrum: values[k] = |X(k)|^2."""

    values: np.ndarray
    bin_hz: float
    fs: int


@dataclass(eq=False)
class FirFilter:
    """Linear-phase FIR filter (odd, symmetric tap vector)."""

    taps: np.ndarray

    def __post_init__(self) -> None:
        self.taps = np.asarray(self.taps, dtype=np.float64)
        if len(self.taps) % 2 == 0:
            raise ValueError("FIR filter must have an odd tap count")

    @property
    def group_delay(self) -> int:
        return (len(self.taps) - 1) // 2


def next_pow2(n: int) -> int:
    p = 1
    while p < n:
        p *= 2
    return p


def segment(buffer: AudioBuffer, frame_len: int) -> list[Frame]:
    """Cut a buffer into consecutive frames; the last one is zero-padded."""
    if frame_len <= 0:
        raise ValueError(f"frame_len must be positive, got {frame_len}")
    x = buffer.samples
    frames = []
    for k in range(0, len(x), frame_len):
        seg = x[k : k + frame_len]
        if len(seg) < frame_len:
            seg = np.concatenate([seg, np.zeros(frame_len - len(seg))])
        frames.append(Frame(seg, index=k // frame_len, start=k))
    return frames


def design_bandpass(low_hz: float, high_hz: float, fs: int, num_taps: int = 513) -> FirFilter:
    """Windowed-sinc (Hamming) linear-phase band-pass FIR design."""
    if not (0 < low_hz < high_hz < fs / 2):
        raise ValueError(f"invalid band edges ({low_hz}, {high_hz}) at fs={fs}")
    if num_taps % 2 == 0:
        raise ValueError("num_taps must be odd")
    m = np.arange(num_taps) - (num_taps - 1) / 2.0
    f1, f2 = low_hz / fs, high_hz / fs
    ideal = 2 * f2 * np.sinc(2 * f2 * m) - 2 * f1 * np.sinc(2 * f1 * m)
    return FirFilter(ideal * np.hamming(num_taps))


def apply_fir(buffer: AudioBuffer, fir: FirFilter) -> AudioBuffer:
    """Convolve with group-delay compensation: output is time-aligned with
    the input and has the same length."""
    if len(buffer) == 0:
        raise ValueError("cannot filter an empty buffer")
    # 'same' with an odd symmetric kernel removes exactly the group delay
    y = sps.fftconvolve(buffer.samples, fir.taps, mode="same")
    return AudioBuffer(y, buffer.sample_rate)


def peak_normalize(buffer: AudioBuffer, target_dbfs: float) -> AudioBuffer:
    """Scale so that max |sample| equals 10^(target_dbfs/20)."""
    peak = np.max(np.abs(buffer.samples)) if len(buffer) else 0.0
    if peak == 0.0:
        raise ValueError("peak of an all-zero buffer is undefined")
    gain = 10.0 ** (target_dbfs / 20.0) / peak
    return AudioBuffer(buffer.samples * gain, buffer.sample_rate)


def power_spectrum(frame: Frame, fft_size: int, fs: int) -> PowerSpectrum:
    """One-sided squared-magnitude FFT of the zero-padded frame."""
    n = len(frame.samples)
    if fft_size < n or fft_size & (fft_size - 1):
        raise ValueError(f"fft_size must be a power of two >= frame length, got {fft_size}")
    spec = np.abs(np.fft.rfft(frame.samples, fft_size)) ** 2
    return PowerSpectrum(spec, bin_hz=fs / fft_size, fs=fs)


def band_power(spectrum: PowerSpectrum, low_hz: float, high_hz: float) -> float:
    """Fraction of total spectral energy inside [low_hz, high_hz]; 0 for an
    all-zero spectrum."""
    if not (0 <= low_hz < high_hz <= spectrum.fs / 2):
        raise ValueError(f"invalid band ({low_hz}, {high_hz}) at fs={spectrum.fs}")
    total = spectrum.values.sum()
    if total <= 0.0:
        return 0.0
    freqs = np.arange(len(spectrum.values)) * spectrum.bin_hz
    mask = (freqs >= low_hz) & (freqs <= high_hz)
    return float(spectrum.values[mask].sum() / total)


def resample(buffer: AudioBuffer, new_fs: int) -> AudioBuffer:
    """Rational polyphase resampling with a Kaiser-windowed sinc filter
    (64 taps per phase, cutoff at 0.45 * min(fs, new_fs))."""
    if new_fs <= 0:
        raise ValueError(f"new_fs must be positive, got {new_fs}")
    fs = buffer.sample_rate
    if new_fs == fs:
        return AudioBuffer(buffer.samples.copy(), fs)
    g = gcd(fs, new_fs)
    up, down = new_fs // g, fs // g
    half = 32 * max(up, down)
    cutoff_rel = 0.9 * min(fs, new_fs) / (fs * up)  # relative to upsampled Nyquist
    taps = sps.firwin(2 * half + 1, cutoff_rel, window=("kaiser", 8.6))
    y = sps.resample_poly(buffer.samples, up, down, window=taps)
    target = int(np.floor(len(buffer) * new_fs / fs + 0.5))
    if len(y) < target:
        y = np.concatenate([y, np.zeros(target - len(y))])
    return AudioBuffer(y[:target], new_fs)


def fit_length(samples: np.ndarray, n: int) -> np.ndarray:
    """Trim or zero-pad to exactly n samples."""
    if len(samples) >= n:
        return samples[:n]
    return np.concatenate([samples, np.zeros(n - len(samples))])
