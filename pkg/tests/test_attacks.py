import numpy as np
import pytest

from voicemark.attacks import (
    AttackSpec,
    AttackUnavailableError,
    CodecRunError,
    apply_attack,
    awgn,
    external_codec,
    requantize,
    resample_attack,
)
from voicemark.audio_io import AudioBuffer

from synth import FS, synth_speech


@pytest.fixture(scope="module")
def speech():
    return AudioBuffer(synth_speech(np.random.default_rng(1234), 2.0), FS)


# --- spec parsing ---


def test_parse_attack_names():
    assert AttackSpec.parse("normal").kind == "normal"
    assert AttackSpec.parse("awgn").snr_db == 40.0
    assert AttackSpec.parse("awgn:30").snr_db == 30.0
    assert AttackSpec.parse("resample-8").intermediate_fs == 8000
    assert AttackSpec.parse("resample-24").intermediate_fs == 24000
    assert AttackSpec.parse("requant-8").bits == 8
    assert AttackSpec.parse("requant-24").bits == 24
    assert AttackSpec.parse("mp3").kind == "external_codec"
    with pytest.raises(ValueError):
        AttackSpec.parse("timewarp")


def test_spec_validation():
    with pytest.raises(ValueError):
        AttackSpec("requantize", bits=12)
    with pytest.raises(ValueError):
        AttackSpec("awgn", snr_db=float("inf"))
    with pytest.raises(ValueError):
        AttackSpec("external_codec")


# --- normal ---


def test_normal_is_identity(speech):
    out = apply_attack(speech, AttackSpec("normal"))
    np.testing.assert_array_equal(out.samples, speech.samples)


# --- awgn ---


def test_awgn_hits_requested_snr(speech):
    out = awgn(speech, 40.0, seed=3)
    noise = out.samples - speech.samples
    measured = 10 * np.log10(np.sum(speech.samples**2) / np.sum(noise**2))
    assert abs(measured - 40.0) <= 0.5


def test_awgn_seeded_reproducible(speech):
    a = awgn(speech, 40.0, seed=7)
    b = awgn(speech, 40.0, seed=7)
    c = awgn(speech, 40.0, seed=8)
    np.testing.assert_array_equal(a.samples, b.samples)
    assert not np.array_equal(a.samples, c.samples)


def test_awgn_infinite_snr_sentinel(speech):
    out = awgn(speech, float("inf"))
    np.testing.assert_array_equal(out.samples, speech.samples)


def test_awgn_unit_power_noise_variance():
    rng = np.random.default_rng(9)
    x = rng.standard_normal(200_000)
    x /= np.sqrt(np.mean(x**2))  # unit power
    out = awgn(AudioBuffer(x, FS), 40.0, seed=1)
    noise = out.samples - x
    assert np.mean(noise**2) == pytest.approx(1e-4, rel=1e-6)


def test_awgn_zero_energy_error():
    with pytest.raises(ValueError):
        awgn(AudioBuffer(np.zeros(100), FS), 40.0)


# --- resample attacks ---


def test_resample_attack_preserves_length(speech):
    for rate in (8000, 24000):
        out = resample_attack(speech, rate)
        assert len(out) == len(speech)
        assert out.sample_rate == FS


def test_resample_24_high_fidelity():
    t = np.arange(FS) / FS
    buf = AudioBuffer(np.sin(2 * np.pi * 1000 * t), FS)
    out = resample_attack(buf, 24000)
    assert np.corrcoef(out.samples, buf.samples)[0, 1] > 0.99


def test_resample_8_removes_high_band():
    rng = np.random.default_rng(10)
    buf = AudioBuffer(rng.standard_normal(2 * FS), FS)
    out = resample_attack(buf, 8000)
    spec = np.abs(np.fft.rfft(out.samples)) ** 2
    freqs = np.fft.rfftfreq(len(out), 1 / FS)
    assert spec[freqs > 4000].sum() / spec.sum() < 0.01


# --- requantization ---


def test_requantize_8_error_bound(speech):
    out = requantize(speech, 8)
    assert np.max(np.abs(out.samples - speech.samples)) <= 2**-8


def test_requantize_idempotent(speech):
    once = requantize(speech, 8)
    twice = requantize(once, 8)
    np.testing.assert_array_equal(once.samples, twice.samples)


def test_requantize_24_identity_on_16bit_grid():
    # 16-bit codes live on the 24-bit grid
    codes = np.arange(-32768, 32768, 77) / 32768.0
    buf = AudioBuffer(codes, FS)
    out = requantize(buf, 24)
    np.testing.assert_array_equal(out.samples, buf.samples)


# --- external codec hook ---


def test_external_codec_identity_command(speech):
    out = external_codec(speech, "cp {in} {out}")
    # write/read at 16 bit costs at most one quantization step
    assert len(out) == len(speech)
    assert np.max(np.abs(out.samples - speech.samples)) <= 2**-15


def test_external_codec_missing_binary(speech):
    with pytest.raises(AttackUnavailableError):
        external_codec(speech, "definitely-not-a-real-binary-xyz {in} {out}")


def test_external_codec_failing_command(speech):
    with pytest.raises(CodecRunError):
        external_codec(speech, "false {in} {out}")


def test_external_codec_no_output(speech):
    with pytest.raises(CodecRunError):
        external_codec(speech, "true {in} {out}")


def test_external_codec_needs_placeholders(speech):
    with pytest.raises(ValueError):
        external_codec(speech, "cat input.wav")


def test_codec_dir_env_prepends_path(speech, tmp_path, monkeypatch):
    script = tmp_path / "fakecodec"
    script.write_text("#!/bin/sh\ncp \"$1\" \"$2\"\n")
    script.chmod(0o755)
    monkeypatch.setenv("VOICEMARK_CODEC_DIR", str(tmp_path))
    out = external_codec(speech, "fakecodec {in} {out}")
    assert len(out) == len(speech)


# --- apply_attack wrapper ---


def test_apply_attack_requires_pipeline_rate():
    with pytest.raises(ValueError):
        apply_attack(AudioBuffer(np.ones(100), 8000), AttackSpec("normal"))


def test_all_native_attacks_preserve_rate_and_length(speech):
    for name in ("normal", "awgn", "resample-8", "resample-24", "requant-8", "requant-24"):
        out = apply_attack(speech, AttackSpec.parse(name, seed=1))
        assert out.sample_rate == FS
        assert len(out) == len(speech)
