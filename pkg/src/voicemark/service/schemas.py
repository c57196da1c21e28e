"""Pydantic request/response models for the HTTP service.

Audio travels as base64-encoded little-endian float32 samples plus a sample
rate, which keeps multi-step pipelines bit-exact across requests.
"""
from __future__ import annotations

import base64

import numpy as np
from pydantic import BaseModel, Field

from ..audio_io import AudioBuffer
from ..watermark import WatermarkConfig


class AudioPayload(BaseModel):
    sample_rate: int = Field(gt=0)
    samples_b64: str

    @classmethod
    def from_buffer(cls, buffer: AudioBuffer) -> "AudioPayload":
        raw = buffer.samples.astype("<f4").tobytes()
        return cls(sample_rate=buffer.sample_rate, samples_b64=base64.b64encode(raw).decode("ascii"))

    def to_buffer(self) -> AudioBuffer:
        raw = base64.b64decode(self.samples_b64)
        return AudioBuffer(np.frombuffer(raw, dtype="<f4").astype(np.float64), self.sample_rate)


class WatermarkSettings(BaseModel):
    """Flat JSON view of WatermarkConfig."""

    payload_bps: int = Field(ge=1)
    alpha0: float = 0.6
    alpha1: float = 0.8
    theta: float | None = None
    band_low_hz: float = 125.0
    band_high_hz: float = 1000.0
    bpf_low_hz: float = 125.0
    bpf_high_hz: float = 4000.0
    target_dbfs: float = -3.0

    def to_config(self) -> WatermarkConfig:
        return WatermarkConfig(
            payload_bps=self.payload_bps,
            alpha0=self.alpha0,
            alpha1=self.alpha1,
            theta=self.theta,
            band=(self.band_low_hz, self.band_high_hz),
            bpf=(self.bpf_low_hz, self.bpf_high_hz),
            target_dbfs=self.target_dbfs,
        )


class HealthResponse(BaseModel):
    status: str
    version: str


class AnonymizeRequest(BaseModel):
    audio: AudioPayload
    alpha: float = Field(gt=0)
    subframe_ms: float = 20.0
    hop_ms: float = 10.0
    order: int = 20


class AnonymizeResponse(BaseModel):
    audio: AudioPayload
    frames_total: int
    frames_passed_through: int


class EmbedRequest(BaseModel):
    audio: AudioPayload
    bits: str = Field(pattern="^[01]*$")
    settings: WatermarkSettings


class EmbedResponse(BaseModel):
    audio: AudioPayload
    capacity_bits: int
    bits_embedded: int


class DetectRequest(BaseModel):
    audio: AudioPayload
    num_bits: int = Field(ge=0)
    settings: WatermarkSettings


class DetectResponse(BaseModel):
    bits: str
    statistics: list[float]
    theta: float
    frame_len: int


class AttackRequest(BaseModel):
    audio: AudioPayload
    kind: str
    snr_db: float = 40.0
    intermediate_fs: int = 8000
    bits: int = 8
    command: str | None = None
    seed: int = 0


class AttackResponse(BaseModel):
    audio: AudioPayload


class CalibrateRequest(BaseModel):
    stat0: list[float]
    stat1: list[float]


class CalibrateResponse(BaseModel):
    theta: float
    balanced_error: float
    separable: bool
    frames0: int = 0
    frames1: int = 0


class CorpusCalibrateRequest(BaseModel):
    corpus_dir: str
    settings: WatermarkSettings


class MetricsRequest(BaseModel):
    reference: str = Field(pattern="^[01]*$")
    detected: str = Field(pattern="^[01]*$")


class MetricsResponse(BaseModel):
    ber: float
    tp: int
    fp: int
    tn: int
    fn: int
    far: float | None
    frr: float | None
    f1: float | None


class EvaluateRequest(BaseModel):
    corpus_dir: str
    payloads: list[int] | None = None
    attacks: list[str] | None = None
    seed: int = 0
    calibrate: bool = True
    settings: WatermarkSettings | None = None


class EvaluateResponse(BaseModel):
    report_text: str
    skipped_attacks: list[str]
