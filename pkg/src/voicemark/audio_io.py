"""WAV file reading/writing and the canonical in-memory audio representation.

Supports RIFF/WAVE with integer PCM (8/16/24-bit) and IEEE float32 data,
little-endian, mono or multichannel (averaged to mono on read).
"""
from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

_FORMAT_PCM = 0x0001
_FORMAT_FLOAT = 0x0003
_FORMAT_EXTENSIBLE = 0xFFFE


class WavFormatError(ValueError):
    """Raised for malformed RIFF structure or unsupported codec tags."""


@dataclass(eq=False)
class AudioBuffer:
    """A mono waveform: float64 samples (nominal range [-1, 1]) plus sample rate."""

    samples: np.ndarray
    sample_rate: int

    def __post_init__(self) -> None:
        self.samples = np.asarray(self.samples, dtype=np.float64).reshape(-1)
        if self.sample_rate <= 0:
            raise ValueError(f"sample_rate must be positive, got {self.sample_rate}")
        if self.samples.size and not np.all(np.isfinite(self.samples)):
            raise ValueError("samples contain NaN or Inf")

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def duration(self) -> float:
        return len(self.samples) / self.sample_rate


def _decode_pcm(raw: bytes, bits: int) -> np.ndarray:
    if bits == 8:
        # 8-bit WAV is unsigned with a 128 offset
        return (np.frombuffer(raw, dtype=np.uint8).astype(np.float64) - 128.0) / 128.0
    if bits == 16:
        return np.frombuffer(raw, dtype="<i2").astype(np.float64) / 32768.0
    if bits == 24:
        b = np.frombuffer(raw, dtype=np.uint8).reshape(-1, 3).astype(np.int32)
        val = b[:, 0] | (b[:, 1] << 8) | (b[:, 2] << 16)
        val -= (val & 0x800000) << 1  # sign extension
        return val.astype(np.float64) / float(1 << 23)
    raise WavFormatError(f"unsupported PCM bit depth: {bits}")


def read_wav(path: str | Path) -> AudioBuffer:
    """Read a WAV file into a mono AudioBuffer.

    Integer PCM is scaled by 1/2^(bits-1) into [-1, 1); multichannel data is
    averaged to mono. Raises FileNotFoundError for a missing file and
    WavFormatError for malformed or unsupported content.
    """
    data = Path(path).read_bytes()
    if len(data) < 12 or data[:4] != b"RIFF" or data[8:12] != b"WAVE":
        raise WavFormatError(f"{path}: not a RIFF/WAVE file")

    fmt = None
    raw = None
    pos = 12
    while pos + 8 <= len(data):
        chunk_id = data[pos : pos + 4]
        (size,) = struct.unpack_from("<I", data, pos + 4)
        body = data[pos + 8 : pos + 8 + size]
        if len(body) < size:
            raise WavFormatError(f"{path}: truncated {chunk_id!r} chunk")
        if chunk_id == b"fmt ":
            if size < 16:
                raise WavFormatError(f"{path}: fmt chunk too short")
            fmt = struct.unpack_from("<HHIIHH", body, 0)
            if fmt[0] == _FORMAT_EXTENSIBLE:
                if size < 40:
                    raise WavFormatError(f"{path}: extensible fmt chunk too short")
                (subformat,) = struct.unpack_from("<H", body, 24)
                fmt = (subformat,) + fmt[1:]
        elif chunk_id == b"data":
            raw = body
        pos += 8 + size + (size & 1)  # chunks are word-aligned

    if fmt is None:
        raise WavFormatError(f"{path}: missing fmt chunk")
    if raw is None:
        raise WavFormatError(f"{path}: missing data chunk")

    tag, channels, rate, _, _, bits = fmt
    if channels < 1:
        raise WavFormatError(f"{path}: invalid channel count {channels}")
    sample_width = bits // 8
    frames = len(raw) // (sample_width * channels)
    raw = raw[: frames * sample_width * channels]

    if tag == _FORMAT_PCM:
        samples = _decode_pcm(raw, bits)
    elif tag == _FORMAT_FLOAT and bits == 32:
        samples = np.frombuffer(raw, dtype="<f4").astype(np.float64)
    else:
        raise WavFormatError(f"{path}: unsupported codec tag {tag:#06x} ({bits}-bit)")

    if samples.size and not np.all(np.isfinite(samples)):
        raise WavFormatError(f"{path}: non-finite sample values")
    if channels > 1:
        samples = samples.reshape(-1, channels).mean(axis=1)
    return AudioBuffer(samples, rate)


def write_wav(buffer: AudioBuffer, path: str | Path, bit_depth: int = 16) -> int:
    """Write an AudioBuffer as WAV and return the number of clipped samples.

    bit_depth 16/24 writes integer PCM (samples outside [-1, 1] are clipped
    and counted); 32 writes IEEE float32, which is lossless and never clips.
    """
    if bit_depth not in (16, 24, 32):
        raise ValueError(f"bit_depth must be 16, 24 or 32 (float), got {bit_depth}")
    x = buffer.samples
    clipped = 0

    if bit_depth == 32:
        fmt_tag, block = _FORMAT_FLOAT, 4
        payload = x.astype("<f4").tobytes()
    else:
        fmt_tag, block = _FORMAT_PCM, bit_depth // 8
        clipped = int(np.count_nonzero((x < -1.0) | (x > 1.0)))
        full = float(1 << (bit_depth - 1))
        codes = np.clip(np.round(x * full), -full, full - 1).astype(np.int32)
        if bit_depth == 16:
            payload = codes.astype("<i2").tobytes()
        else:
            u = codes.astype(np.uint32)
            b = np.empty((len(u), 3), dtype=np.uint8)
            b[:, 0] = u & 0xFF
            b[:, 1] = (u >> 8) & 0xFF
            b[:, 2] = (u >> 16) & 0xFF
            payload = b.tobytes()

    rate = buffer.sample_rate
    fmt_body = struct.pack("<HHIIHH", fmt_tag, 1, rate, rate * block, block, block * 8)
    chunks = [(b"fmt ", fmt_body)]
    if fmt_tag == _FORMAT_FLOAT:
        chunks.append((b"fact", struct.pack("<I", len(x))))
    chunks.append((b"data", payload))

    out = bytearray()
    for cid, body in chunks:
        out += cid + struct.pack("<I", len(body)) + body
        if len(body) & 1:
            out += b"\x00"
    header = b"RIFF" + struct.pack("<I", 4 + len(out)) + b"WAVE"
    Path(path).write_bytes(header + bytes(out))
    return clipped
