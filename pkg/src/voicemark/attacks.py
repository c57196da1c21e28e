"""Signal-processing attacks applied between embedding and detection:
additive noise, resampling round trips, requantization, and external codec
round trips via a command hook. Every attack returns a 16 kHz buffer of the
source length so detection frames stay aligned."""
from __future__ import annotations

import math
import os
import shlex
import shutil
import subprocess
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .audio_io import AudioBuffer, read_wav, write_wav
from .dsp import fit_length, resample
from .watermark import PIPELINE_RATE

CODEC_DIR_ENV = "VOICEMARK_CODEC_DIR"

# Reference command lines for codec round trips ({in}/{out} are temp WAV
# paths; intermediate files may be derived from {out}). All are optional:
# a missing binary raises AttackUnavailableError.
REFERENCE_CODEC_COMMANDS = {
    "mp3": (
        "ffmpeg -y -loglevel error -i {in} -c:a libmp3lame -b:a 256k {out}.mp3 "
        "&& ffmpeg -y -loglevel error -i {out}.mp3 -ar 16000 {out}"
    ),
    "flv": (
        "ffmpeg -y -loglevel error -i {in} -ar 16000 -f flv {out}.flv "
        "&& ffmpeg -y -loglevel error -i {out}.flv -ar 16000 {out}"
    ),
    "g723.1": (
        "ffmpeg -y -loglevel error -i {in} -ar 8000 -c:a g723_1 {out}.g723 "
        "&& ffmpeg -y -loglevel error -f g723_1 -i {out}.g723 -ar 16000 {out}"
    ),
}

NATIVE_ATTACKS = ("normal", "awgn", "resample-8", "resample-24", "requant-8", "requant-24")


class AttackUnavailableError(RuntimeError):
    """The external codec binary for this attack is not installed."""


class CodecRunError(RuntimeError):
    """The external codec ran but failed or produced unreadable output."""


@dataclass
class AttackSpec:
    """One attack case: kind plus its kind-specific parameter."""

    kind: str
    snr_db: float = 40.0
    intermediate_fs: int = 8000
    bits: int = 8
    command: str | None = None
    seed: int = 0

    def __post_init__(self) -> None:
        if self.kind not in ("normal", "awgn", "resample", "requantize", "external_codec"):
            raise ValueError(f"unknown attack kind: {self.kind}")
        if self.kind == "awgn" and not math.isfinite(self.snr_db):
            raise ValueError("snr_db must be finite")
        if self.kind == "resample" and self.intermediate_fs <= 0:
            raise ValueError("intermediate_fs must be positive")
        if self.kind == "requantize" and self.bits not in (8, 24):
            raise ValueError(f"requantize bits must be 8 or 24, got {self.bits}")
        if self.kind == "external_codec" and not self.command:
            raise ValueError("external_codec needs a command template")

    @classmethod
    def parse(cls, name: str, seed: int = 0) -> "AttackSpec":
        """Build a spec from an attack case name like 'awgn' or 'resample-8'."""
        if name == "normal":
            return cls("normal", seed=seed)
        if name == "awgn" or name.startswith("awgn:"):
            snr = float(name.split(":", 1)[1]) if ":" in name else 40.0
            return cls("awgn", snr_db=snr, seed=seed)
        if name.startswith("resample-"):
            return cls("resample", intermediate_fs=int(name.split("-", 1)[1]) * 1000, seed=seed)
        if name.startswith("requant-"):
            return cls("requantize", bits=int(name.split("-", 1)[1]), seed=seed)
        if name in REFERENCE_CODEC_COMMANDS:
            return cls("external_codec", command=REFERENCE_CODEC_COMMANDS[name], seed=seed)
        raise ValueError(f"unknown attack name: {name}")


def awgn(buffer: AudioBuffer, snr_db: float, seed: int = 0) -> AudioBuffer:
    """Add seeded white Gaussian noise at an exact signal-to-noise ratio.
    snr_db = +inf is a no-noise sentinel."""
    if math.isinf(snr_db) and snr_db > 0:
        return AudioBuffer(buffer.samples.copy(), buffer.sample_rate)
    signal_power = np.sum(buffer.samples**2)
    if signal_power == 0.0:
        raise ValueError("SNR is undefined for a zero-energy buffer")
    noise = np.random.default_rng(seed).standard_normal(len(buffer))
    gain = np.sqrt(signal_power / (10.0 ** (snr_db / 10.0) * np.sum(noise**2)))
    return AudioBuffer(buffer.samples + gain * noise, buffer.sample_rate)


def resample_attack(buffer: AudioBuffer, intermediate_fs: int) -> AudioBuffer:
    """Resample to intermediate_fs and back, trimmed/padded to source length."""
    down = resample(buffer, intermediate_fs)
    back = resample(down, buffer.sample_rate)
    return AudioBuffer(fit_length(back.samples, len(buffer)), buffer.sample_rate)


def requantize(buffer: AudioBuffer, bits: int) -> AudioBuffer:
    """Round samples onto a 2^(bits-1) grid, clipped to the representable range."""
    full = float(1 << (bits - 1))
    q = np.clip(np.round(buffer.samples * full) / full, -1.0, 1.0 - 1.0 / full)
    return AudioBuffer(q, buffer.sample_rate)


def external_codec(buffer: AudioBuffer, command: str) -> AudioBuffer:
    """Round-trip the buffer through an external command.

    The template's {in} and {out} placeholders become temporary WAV paths;
    the command runs in a shell so multi-step pipelines work. The directory
    in $VOICEMARK_CODEC_DIR, if set, is prepended to PATH.
    """
    if "{in}" not in command or "{out}" not in command:
        raise ValueError("command template must contain {in} and {out} placeholders")

    env = os.environ.copy()
    codec_dir = env.get(CODEC_DIR_ENV)
    if codec_dir:
        env["PATH"] = codec_dir + os.pathsep + env.get("PATH", "")

    binary = shlex.split(command.replace("{in}", "IN").replace("{out}", "OUT"))[0]
    if shutil.which(binary, path=env.get("PATH")) is None:
        raise AttackUnavailableError(f"attack unavailable: {binary!r} not found on PATH")

    with tempfile.TemporaryDirectory(prefix="voicemark-codec-") as tmp:
        in_path = Path(tmp) / "in.wav"
        out_path = Path(tmp) / "out.wav"
        write_wav(buffer, in_path, bit_depth=16)
        cmd = command.replace("{in}", str(in_path)).replace("{out}", str(out_path))
        proc = subprocess.run(cmd, shell=True, env=env, capture_output=True, text=True)
        if proc.returncode == 127:
            raise AttackUnavailableError(f"attack unavailable: {cmd!r} exited 127")
        if proc.returncode != 0:
            raise CodecRunError(f"codec command failed ({proc.returncode}): {proc.stderr.strip()}")
        if not out_path.exists():
            raise CodecRunError("codec command produced no output file")
        decoded = read_wav(out_path)

    if decoded.sample_rate != buffer.sample_rate:
        decoded = resample(decoded, buffer.sample_rate)
    return AudioBuffer(fit_length(decoded.samples, len(buffer)), buffer.sample_rate)


def apply_attack(buffer: AudioBuffer, spec: AttackSpec) -> AudioBuffer:
    """Apply one attack; the result keeps the source rate and length."""
    if buffer.sample_rate != PIPELINE_RATE:
        raise ValueError(f"attacks operate at {PIPELINE_RATE} Hz, got {buffer.sample_rate}")
    if spec.kind == "normal":
        return AudioBuffer(buffer.samples.copy(), buffer.sample_rate)
    if spec.kind == "awgn":
        return awgn(buffer, spec.snr_db, spec.seed)
    if spec.kind == "resample":
        return resample_attack(buffer, spec.intermediate_fs)
    if spec.kind == "requantize":
        return requantize(buffer, spec.bits)
    return external_codec(buffer, spec.command)
