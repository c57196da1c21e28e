"""Synthetic speech for the test corpus: a glottal impulse train driving a
cascade of time-varying formant resonators, articulated at syllable rate,
with a light breath-noise floor and a syllabic amplitude envelope."""
import numpy as np
import scipy.signal as sps

FS = 16000

_BASE_FORMANTS = np.array([520.0, 1550.0, 2500.0, 3400.0])
_EXCURSION = np.array([0.32, 0.22, 0.10, 0.05])
_BANDWIDTHS = np.array([90.0, 110.0, 160.0, 200.0])


def synth_speech(rng: np.random.Generator, duration: float, fs: int = FS) -> np.ndarray:
    n = int(duration * fs)
    t = np.arange(n) / fs

    f0 = rng.uniform(95, 190) * (
        1 + 0.05 * np.sin(2 * np.pi * rng.uniform(0.2, 0.5) * t + rng.uniform(0, 2 * np.pi))
    )
    phase = np.cumsum(2 * np.pi * f0 / fs)
    excitation = (np.diff(np.floor(phase / (2 * np.pi)), prepend=0.0) > 0).astype(np.float64)
    excitation += 0.005 * rng.standard_normal(n)

    rates = rng.uniform(4.0, 7.5, size=4)
    phases = rng.uniform(0, 2 * np.pi, size=4)
    slow_rates = rng.uniform(0.3, 0.9, size=4)
    slow_phases = rng.uniform(0, 2 * np.pi, size=4)

    block = int(0.010 * fs)
    y = np.zeros(n)
    states = [np.zeros(2) for _ in range(4)]
    for start in range(0, n, block):
        seg = excitation[start : start + block]
        tb = t[start]
        for j in range(4):
            mod = 0.85 * np.sin(2 * np.pi * rates[j] * tb + phases[j])
            mod += 0.15 * np.sin(2 * np.pi * slow_rates[j] * tb + slow_phases[j])
            freq = _BASE_FORMANTS[j] * (1 + _EXCURSION[j] * mod)
            radius = np.exp(-np.pi * _BANDWIDTHS[j] / fs)
            theta = 2 * np.pi * freq / fs
            seg, states[j] = sps.lfilter(
                [1 - radius], [1.0, -2 * radius * np.cos(theta), radius**2], seg, zi=states[j]
            )
        y[start : start + block] = seg

    envelope = 0.60 + 0.40 * np.sin(2 * np.pi * rng.uniform(2.5, 4.0) * t + rng.uniform(0, 2 * np.pi))
    y *= np.clip(envelope, 0.2, 1.0)
    return 0.9 * y / np.max(np.abs(y))


def single_resonance(rng: np.random.Generator, duration: float, angle: float,
                     radius: float = 0.99, fs: int = FS) -> np.ndarray:
    """Noise-excited two-pole resonator with a known pole angle (radians)."""
    n = int(duration * fs)
    x = sps.lfilter([1.0], [1.0, -2 * radius * np.cos(angle), radius**2], rng.standard_normal(n))
    return 0.5 * x / np.max(np.abs(x))
