"""Watermark embedding by frame-wise switching between two anonymized
streams, and blind detection by thresholding a low-band power ratio.

Embedding anonymizes the whole utterance twice (with the bit-0 and bit-1
McAdams coefficients), peak-normalizes and band-pass filters both streams,
then concatenates frames picked per payload bit. Detection band-pass
filters the received signal, segments it on the same frame grid, and emits
bit 1 whenever the energy ratio (detection band over embedding band)
exceeds the threshold - no access to the original signal is needed.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .audio_io import AudioBuffer
from .dsp import apply_fir, band_power, design_bandpass, next_pow2, peak_normalize, power_spectrum, segment
from .mcadams import McAdamsParams, anonymize

PIPELINE_RATE = 16000

# Default detection thresholds per payload; ship as starting points but the
# ratio statistic is calibration-sensitive, so prefer calibrate_threshold.
DEFAULT_THETAS = {2: 0.15, 4: 0.09, 8: 0.05, 16: 0.02, 32: 0.01}

BPF_NUM_TAPS = 513


class CapacityError(ValueError):
    """Raised when a bit-stream does not fit the buffer's payload capacity."""


@dataclass
class WatermarkConfig:
    """All embedding/detection parameters for one payload rate."""

    payload_bps: int
    alpha0: float = 0.6
    alpha1: float = 0.8
    theta: float | None = None
    band: tuple[float, float] = (125.0, 1000.0)
    bpf: tuple[float, float] = (125.0, 4000.0)
    target_dbfs: float = -3.0
    subframe_ms: float = 20.0
    hop_ms: float = 10.0
    lpc_order: int = 20

    def __post_init__(self) -> None:
        if self.payload_bps < 1:
            raise ValueError(f"payload_bps must be >= 1, got {self.payload_bps}")
        if self.alpha0 <= 0 or self.alpha1 <= 0 or self.alpha0 == self.alpha1:
            raise ValueError("alpha0 and alpha1 must be positive and distinct")
        if self.theta is not None and not (0 < self.theta < 1):
            raise ValueError(f"theta must lie in (0, 1), got {self.theta}")
        if not (self.band[0] < self.band[1]) or not (self.bpf[0] < self.bpf[1]):
            raise ValueError("band edges must be increasing")

    def resolved_theta(self) -> float:
        if self.theta is not None:
            return self.theta
        if self.payload_bps in DEFAULT_THETAS:
            return DEFAULT_THETAS[self.payload_bps]
        raise ValueError(
            f"no default threshold for {self.payload_bps} bps; "
            "calibrate one or set theta explicitly"
        )

    def frame_len(self, fs: int = PIPELINE_RATE) -> int:
        n = int(round(fs / self.payload_bps))
        if n < int(round(self.subframe_ms * fs / 1000.0)):
            raise ValueError(
                f"{self.payload_bps} bps frames ({n} samples) are shorter than "
                f"the {self.subframe_ms} ms LPC sub-frame"
            )
        return n

    def capacity(self, buffer: AudioBuffer) -> int:
        return int(np.floor(buffer.duration * self.payload_bps))


@dataclass(eq=False)
class DetectionReport:
    """Detected bits with the per-frame statistics that produced them."""

    bits: np.ndarray
    statistics: np.ndarray
    theta: float
    frame_len: int

    def to_text(self) -> str:
        lines = [
            "[detection]",
            f"theta = {self.theta:.6f}",
            f"frame_len = {self.frame_len}",
            f"num_bits = {len(self.bits)}",
            f"bits = {bits_to_string(self.bits)}",
            "[frames]",
        ]
        for k, (stat, bit) in enumerate(zip(self.statistics, self.bits)):
            lines.append(f"{k} {stat:.6f} {int(bit)}")
        return "\n".join(lines) + "\n"


@dataclass(eq=False)
class CalibrationResult:
    """Threshold choice plus the balanced error it achieves."""

    theta: float
    balanced_error: float
    separable: bool


def _check_rate(buffer: AudioBuffer) -> None:
    if buffer.sample_rate != PIPELINE_RATE:
        raise ValueError(f"buffer must be at {PIPELINE_RATE} Hz, got {buffer.sample_rate}")


def prepare_streams(buffer: AudioBuffer, config: WatermarkConfig) -> tuple[AudioBuffer, AudioBuffer]:
    """Anonymize with both coefficients, then normalize and band-pass filter.

    The two returned streams are what embedding switches between; they are
    independent of the payload rate.
    """
    _check_rate(buffer)
    fir = design_bandpass(config.bpf[0], config.bpf[1], buffer.sample_rate, BPF_NUM_TAPS)
    streams = []
    for alpha in (config.alpha0, config.alpha1):
        params = McAdamsParams(alpha, config.subframe_ms, config.hop_ms, config.lpc_order)
        anon = anonymize(buffer, params).audio
        streams.append(apply_fir(peak_normalize(anon, config.target_dbfs), fir))
    return streams[0], streams[1]


def switch_frames(a0: AudioBuffer, a1: AudioBuffer, bits: np.ndarray, frame_len: int) -> AudioBuffer:
    """Concatenate frames from a1 where the bit is 1, else from a0; audio
    beyond the bit-stream stays on the a0 stream."""
    y = a0.samples.copy()
    for k, bit in enumerate(np.asarray(bits, dtype=int)):
        if bit:
            y[k * frame_len : (k + 1) * frame_len] = a1.samples[k * frame_len : (k + 1) * frame_len]
    return AudioBuffer(y, a0.sample_rate)


def embed(buffer: AudioBuffer, bits: np.ndarray, config: WatermarkConfig) -> AudioBuffer:
    """Embed a bit-stream; output has the input's length and is anonymized
    everywhere (unwatermarked tail runs on the bit-0 stream)."""
    _check_rate(buffer)
    capacity = config.capacity(buffer)
    if len(bits) > capacity:
        raise CapacityError(f"{len(bits)} bits exceed capacity {capacity} at {config.payload_bps} bps")
    a0, a1 = prepare_streams(buffer, config)
    return switch_frames(a0, a1, bits, config.frame_len(buffer.sample_rate))


def detection_statistics(buffer: AudioBuffer, config: WatermarkConfig) -> np.ndarray:
    """Per-frame band-power ratio: energy in config.band over energy in
    config.bpf, computed after band-pass filtering. Scale-invariant."""
    _check_rate(buffer)
    fs = buffer.sample_rate
    frame_len = config.frame_len(fs)
    fir = design_bandpass(config.bpf[0], config.bpf[1], fs, BPF_NUM_TAPS)
    filtered = apply_fir(buffer, fir)
    fft_size = next_pow2(frame_len)
    stats = np.zeros(int(np.ceil(len(buffer) / frame_len)))
    for frame in segment(filtered, frame_len):
        spec = power_spectrum(frame, fft_size, fs)
        denom = band_power(spec, config.bpf[0], config.bpf[1])
        if denom > 0.0:
            stats[frame.index] = band_power(spec, config.band[0], config.band[1]) / denom
    return stats


def detect(buffer: AudioBuffer, config: WatermarkConfig, num_bits: int) -> DetectionReport:
    """Blind detection: threshold the per-frame statistic at theta."""
    _check_rate(buffer)
    capacity = config.capacity(buffer)
    if num_bits > capacity:
        raise CapacityError(f"num_bits {num_bits} exceeds capacity {capacity}")
    theta = config.resolved_theta()
    stats = detection_statistics(buffer, config)[:num_bits]
    return DetectionReport(
        bits=(stats > theta).astype(int),
        statistics=stats,
        theta=theta,
        frame_len=config.frame_len(buffer.sample_rate),
    )


def calibrate_threshold(stat0: np.ndarray, stat1: np.ndarray) -> CalibrationResult:
    """Pick theta minimizing (FAR + FRR)/2 over midpoints of the pooled
    sorted statistics; perfectly separable classes get the gap midpoint."""
    s0 = np.sort(np.asarray(stat0, dtype=np.float64))
    s1 = np.sort(np.asarray(stat1, dtype=np.float64))
    if len(s0) == 0 or len(s1) == 0:
        raise ValueError("both statistic sets must be non-empty")

    if s0[-1] < s1[0]:
        return CalibrationResult(0.5 * (s0[-1] + s1[0]), 0.0, True)

    pooled = np.sort(np.concatenate([s0, s1]))
    candidates = 0.5 * (pooled[:-1] + pooled[1:])
    far = np.array([np.mean(s0 > t) for t in candidates])
    frr = np.array([np.mean(s1 <= t) for t in candidates])
    errors = 0.5 * (far + frr)
    best = errors.min()
    if best >= 0.5:
        return CalibrationResult(float(np.median(pooled)), float(best), False)
    minimizers = np.nonzero(errors == best)[0]
    theta = float(candidates[minimizers[len(minimizers) // 2]])
    return CalibrationResult(theta, float(best), False)


# --- bit-stream and image payload serialization ---


def bits_to_string(bits: np.ndarray) -> str:
    return "".join("1" if b else "0" for b in np.asarray(bits, dtype=int))


def bits_from_string(text: str) -> np.ndarray:
    kept = [c for c in text if not c.isspace()]
    if any(c not in "01" for c in kept):
        raise ValueError("bit-stream may contain only '0', '1' and whitespace")
    return np.array([int(c) for c in kept], dtype=int)


def read_bitstream(path: str | Path) -> np.ndarray:
    return bits_from_string(Path(path).read_text())


def write_bitstream(bits: np.ndarray, path: str | Path) -> None:
    Path(path).write_text(bits_to_string(bits) + "\n")


def bits_from_image(path: str | Path) -> tuple[np.ndarray, tuple[int, int]]:
    """Serialize a PBM image (P1 or P4) row-major; black=1, white=0."""
    data = Path(path).read_bytes()
    magic = data[:2]
    if magic == b"P1":
        tokens = []
        for line in data[2:].decode("ascii", errors="replace").splitlines():
            line = line.split("#", 1)[0]
            tokens.extend(line.split())
        if len(tokens) < 2:
            raise ValueError(f"{path}: truncated PBM header")
        width, height = int(tokens[0]), int(tokens[1])
        cells = "".join(tokens[2:])
        if len(cells) != width * height or any(c not in "01" for c in cells):
            raise ValueError(f"{path}: expected {width * height} binary cells")
        bits = np.array([int(c) for c in cells], dtype=int)
        return bits, (width, height)
    if magic == b"P4":
        pos = 2
        fields: list[int] = []
        while len(fields) < 2:
            while pos < len(data) and data[pos : pos + 1].isspace():
                pos += 1
            if pos < len(data) and data[pos : pos + 1] == b"#":
                while pos < len(data) and data[pos] != 0x0A:
                    pos += 1
                continue
            start = pos
            while pos < len(data) and not data[pos : pos + 1].isspace():
                pos += 1
            fields.append(int(data[start:pos]))
        pos += 1  # single whitespace after height
        width, height = fields
        row_bytes = (width + 7) // 8
        raw = data[pos : pos + row_bytes * height]
        if len(raw) < row_bytes * height:
            raise ValueError(f"{path}: truncated P4 raster")
        rows = np.unpackbits(np.frombuffer(raw, dtype=np.uint8).reshape(height, row_bytes), axis=1)
        return rows[:, :width].reshape(-1).astype(int), (width, height)
    raise ValueError(f"{path}: unsupported image format (need PBM P1 or P4)")


def image_from_bits(bits: np.ndarray, width: int, height: int, path: str | Path) -> None:
    """Write bits as an ASCII PBM (P1) image; inverse of bits_from_image."""
    bits = np.asarray(bits, dtype=int)
    if len(bits) != width * height:
        raise ValueError(f"{len(bits)} bits do not fill a {width}x{height} image")
    rows = ["P1", f"{width} {height}"]
    for r in range(height):
        rows.append(" ".join(str(int(b)) for b in bits[r * width : (r + 1) * width]))
    Path(path).write_text("\n".join(rows) + "\n")
