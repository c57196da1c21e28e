import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from voicemark.audio_io import AudioBuffer
from voicemark.dsp import (
    FirFilter,
    apply_fir,
    band_power,
    design_bandpass,
    next_pow2,
    peak_normalize,
    power_spectrum,
    resample,
    segment,
)

FS = 16000


def dtft_gain(taps, f_hz, fs):
    """Independent oracle: evaluate the filter's DTFT magnitude directly."""
    n = np.arange(len(taps))
    return abs(np.sum(taps * np.exp(-2j * np.pi * f_hz / fs * n)))


# --- segment ---


def test_segment_pads_last_frame():
    buf = AudioBuffer(np.arange(10, dtype=float), FS)
    frames = segment(buf, 4)
    assert len(frames) == 3
    np.testing.assert_array_equal(frames[2].samples, [8, 9, 0, 0])
    assert [f.start for f in frames] == [0, 4, 8]


def test_segment_exact_fit_and_empty():
    assert len(segment(AudioBuffer(np.ones(8), FS), 8)) == 1
    assert segment(AudioBuffer(np.array([]), FS), 4) == []
    with pytest.raises(ValueError):
        segment(AudioBuffer(np.ones(8), FS), 0)


@settings(max_examples=30, deadline=None)
@given(n=st.integers(1, 200), frame_len=st.integers(1, 50))
def test_segment_concatenation_roundtrip(n, frame_len):
    x = np.linspace(-1, 1, n)
    frames = segment(AudioBuffer(x, FS), frame_len)
    rebuilt = np.concatenate([f.samples for f in frames])[:n]
    np.testing.assert_array_equal(rebuilt, x)


# --- band-pass design ---


@pytest.fixture(scope="module")
def bpf():
    return design_bandpass(125, 4000, FS, 513)


def test_bandpass_center_gain_within_half_db(bpf):
    gain = dtft_gain(bpf.taps, np.sqrt(125 * 4000), FS)
    assert abs(20 * np.log10(gain)) <= 0.5
    gain_1k = dtft_gain(bpf.taps, 1000, FS)
    assert abs(20 * np.log10(gain_1k)) <= 0.5


def test_bandpass_stopband_attenuation(bpf):
    assert 20 * np.log10(max(dtft_gain(bpf.taps, 0, FS), 1e-300)) < -40
    assert 20 * np.log10(max(dtft_gain(bpf.taps, FS / 2, FS), 1e-300)) < -40


def test_bandpass_taps_symmetric(bpf):
    np.testing.assert_array_equal(bpf.taps, bpf.taps[::-1])
    assert len(bpf.taps) == 513


def test_bandpass_invalid_edges():
    with pytest.raises(ValueError):
        design_bandpass(4000, 125, FS, 513)
    with pytest.raises(ValueError):
        design_bandpass(125, 9000, FS, 513)
    with pytest.raises(ValueError):
        design_bandpass(125, 4000, FS, 512)


# --- apply_fir ---


def test_apply_fir_impulse_returns_centered_taps(bpf):
    n = 2001
    x = np.zeros(n)
    x[n // 2] = 1.0
    y = apply_fir(AudioBuffer(x, FS), bpf).samples
    lo = n // 2 - bpf.group_delay
    np.testing.assert_allclose(y[lo : lo + 513], bpf.taps, atol=1e-12)


def test_apply_fir_passband_sine_amplitude(bpf):
    t = np.arange(FS) / FS
    y = apply_fir(AudioBuffer(np.sin(2 * np.pi * 1000 * t), FS), bpf).samples
    # ignore edge transients of half the filter length
    core = y[1000:-1000]
    assert abs(np.max(np.abs(core)) - 1.0) < 0.06


def test_apply_fir_stopband_sine_attenuated(bpf):
    t = np.arange(FS) / FS
    y = apply_fir(AudioBuffer(np.sin(2 * np.pi * 50 * t), FS), bpf).samples
    assert np.max(np.abs(y[1000:-1000])) < 0.01


def test_apply_fir_is_linear(bpf):
    rng = np.random.default_rng(0)
    x1, x2 = rng.standard_normal(3000), rng.standard_normal(3000)
    lhs = apply_fir(AudioBuffer(2.0 * x1 + 0.5 * x2, FS), bpf).samples
    rhs = 2.0 * apply_fir(AudioBuffer(x1, FS), bpf).samples + 0.5 * apply_fir(AudioBuffer(x2, FS), bpf).samples
    np.testing.assert_allclose(lhs, rhs, atol=1e-9)


def test_apply_fir_empty_buffer(bpf):
    with pytest.raises(ValueError):
        apply_fir(AudioBuffer(np.array([]), FS), bpf)


def test_fir_filter_requires_odd_taps():
    with pytest.raises(ValueError):
        FirFilter(np.ones(4))


# --- peak normalization ---


def test_peak_normalize_hits_target():
    buf = AudioBuffer(np.array([0.1, -0.5, 0.25]), FS)
    out = peak_normalize(buf, -3.0)
    assert abs(np.max(np.abs(out.samples)) - 10 ** (-3 / 20)) < 1e-12
    # shape is unchanged up to one scale factor
    np.testing.assert_allclose(out.samples / out.samples[0], buf.samples / buf.samples[0])


def test_peak_normalize_idempotent():
    buf = AudioBuffer(np.array([0.3, -0.7]), FS)
    once = peak_normalize(buf, -6.0)
    twice = peak_normalize(once, -6.0)
    np.testing.assert_allclose(once.samples, twice.samples, rtol=1e-12)


def test_peak_normalize_zero_buffer():
    with pytest.raises(ValueError):
        peak_normalize(AudioBuffer(np.zeros(8), FS), -3.0)


# --- power spectrum ---


def test_power_spectrum_zero_frame():
    frames = segment(AudioBuffer(np.zeros(64), FS), 64)
    spec = power_spectrum(frames[0], 64, FS)
    assert np.all(spec.values == 0)
    assert len(spec.values) == 33


def test_power_spectrum_sine_at_exact_bin():
    k, n = 8, 256
    x = np.sin(2 * np.pi * k * np.arange(n) / n)
    frames = segment(AudioBuffer(x, FS), n)
    spec = power_spectrum(frames[0], n, FS)
    assert spec.values[k] / spec.values.sum() > 0.999


def test_power_spectrum_parseval():
    rng = np.random.default_rng(1)
    x = rng.standard_normal(300)
    frames = segment(AudioBuffer(x, FS), 300)
    fft_size = next_pow2(300)
    spec = power_spectrum(frames[0], fft_size, FS)
    # one-sided values double everything except DC and Nyquist
    doubled = 2 * spec.values.sum() - spec.values[0] - spec.values[-1]
    time_energy = np.sum(frames[0].samples ** 2)
    assert abs(doubled / fft_size - time_energy) <= 1e-9 * time_energy


def test_power_spectrum_rejects_bad_fft_size():
    frames = segment(AudioBuffer(np.ones(100), FS), 100)
    with pytest.raises(ValueError):
        power_spectrum(frames[0], 100, FS)
    with pytest.raises(ValueError):
        power_spectrum(frames[0], 64, FS)


# --- band power ---


def test_band_power_full_band_is_one():
    frames = segment(AudioBuffer(np.random.default_rng(2).standard_normal(256), FS), 256)
    spec = power_spectrum(frames[0], 256, FS)
    assert band_power(spec, 0, FS / 2) == pytest.approx(1.0)


def test_band_power_zero_spectrum_is_zero():
    frames = segment(AudioBuffer(np.zeros(128), FS), 128)
    spec = power_spectrum(frames[0], 128, FS)
    assert band_power(spec, 125, 1000) == 0.0


def test_band_power_concentrated_sine():
    t = np.arange(4096) / FS
    x = np.sin(2 * np.pi * 300 * t)
    frames = segment(AudioBuffer(x, FS), 4096)
    spec = power_spectrum(frames[0], 4096, FS)
    assert band_power(spec, 125, 1000) > 0.99


def test_band_power_partition_sums_to_one():
    frames = segment(AudioBuffer(np.random.default_rng(3).standard_normal(512), FS), 512)
    spec = power_spectrum(frames[0], 512, FS)
    edges = [0, 500, 2000, 5000, FS / 2]
    # disjoint bin partition: shift each lower edge past the previous band
    total = band_power(spec, edges[0], edges[1])
    for lo, hi in zip(edges[1:], edges[2:]):
        total += band_power(spec, lo + spec.bin_hz, hi)
    assert total == pytest.approx(1.0, abs=1e-12)


def test_band_power_invalid_band():
    frames = segment(AudioBuffer(np.ones(64), FS), 64)
    spec = power_spectrum(frames[0], 64, FS)
    with pytest.raises(ValueError):
        band_power(spec, 1000, 125)


# --- resample ---


def test_resample_identity_same_rate():
    buf = AudioBuffer(np.random.default_rng(4).standard_normal(1000), FS)
    out = resample(buf, FS)
    assert np.array_equal(out.samples, buf.samples)


def test_resample_length_scaling():
    buf = AudioBuffer(np.zeros(16000), FS)
    assert len(resample(buf, 24000)) == 24000
    assert len(resample(AudioBuffer(np.zeros(16001), FS), 24000)) == round(16001 * 1.5)


def test_resample_roundtrip_preserves_dominant_peak():
    t = np.arange(FS) / FS
    buf = AudioBuffer(np.sin(2 * np.pi * 440 * t), FS)
    rt = resample(resample(buf, 8000), FS)
    nfft = 16384
    spec = np.abs(np.fft.rfft(rt.samples, nfft)) ** 2
    peak_hz = np.argmax(spec) * FS / nfft
    assert abs(peak_hz - 440) <= FS / nfft


def test_resample_rejects_bad_rate():
    with pytest.raises(ValueError):
        resample(AudioBuffer(np.zeros(10), FS), 0)
