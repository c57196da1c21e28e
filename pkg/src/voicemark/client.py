"""Thin HTTP client for the voicemark service.

Without a base URL the client mounts the FastAPI app in-process over an
ASGI transport, so the CLI works with no running server; with a base URL it
talks to a remote instance with the same requests.
"""
from __future__ import annotations

import asyncio

import httpx

from .audio_io import AudioBuffer
from .service.app import create_app
from .service.schemas import AudioPayload, WatermarkSettings
from .watermark import WatermarkConfig


class ServiceError(RuntimeError):
    """An error response from the service, carrying its machine-readable kind."""

    def __init__(self, status: int, kind: str, message: str):
        super().__init__(f"{kind}: {message}")
        self.status = status
        self.kind = kind
        self.message = message


def settings_from_config(config: WatermarkConfig) -> WatermarkSettings:
    return WatermarkSettings(
        payload_bps=config.payload_bps,
        alpha0=config.alpha0,
        alpha1=config.alpha1,
        theta=config.theta,
        band_low_hz=config.band[0],
        band_high_hz=config.band[1],
        bpf_low_hz=config.bpf[0],
        bpf_high_hz=config.bpf[1],
        target_dbfs=config.target_dbfs,
    )


class VoicemarkClient:
    """Synchronous client; every method is one POST against the service."""

    def __init__(self, base_url: str | None = None, timeout: float | None = None):
        self.base_url = base_url
        self.timeout = timeout

    def _post(self, path: str, payload: dict) -> dict:
        if self.base_url:
            with httpx.Client(base_url=self.base_url, timeout=self.timeout) as client:
                response = client.post(path, json=payload)
        else:
            response = asyncio.run(self._post_inprocess(path, payload))
        if response.status_code != 200:
            detail = {}
            try:
                detail = response.json().get("detail", {})
            except ValueError:
                pass
            if not isinstance(detail, dict):
                detail = {"message": str(detail)}
            raise ServiceError(
                response.status_code,
                detail.get("error", "error"),
                detail.get("message", response.text),
            )
        return response.json()

    async def _post_inprocess(self, path: str, payload: dict) -> httpx.Response:
        transport = httpx.ASGITransport(app=create_app())
        async with httpx.AsyncClient(
            transport=transport, base_url="http://voicemark.internal", timeout=self.timeout
        ) as client:
            return await client.post(path, json=payload)

    def anonymize(
        self, buffer: AudioBuffer, alpha: float, subframe_ms: float = 20.0,
        hop_ms: float = 10.0, order: int = 20,
    ) -> tuple[AudioBuffer, int, int]:
        body = self._post(
            "/v1/anonymize",
            {
                "audio": AudioPayload.from_buffer(buffer).model_dump(),
                "alpha": alpha,
                "subframe_ms": subframe_ms,
                "hop_ms": hop_ms,
                "order": order,
            },
        )
        audio = AudioPayload(**body["audio"]).to_buffer()
        return audio, body["frames_total"], body["frames_passed_through"]

    def embed(self, buffer: AudioBuffer, bits: str, config: WatermarkConfig) -> tuple[AudioBuffer, int]:
        body = self._post(
            "/v1/embed",
            {
                "audio": AudioPayload.from_buffer(buffer).model_dump(),
                "bits": bits,
                "settings": settings_from_config(config).model_dump(),
            },
        )
        return AudioPayload(**body["audio"]).to_buffer(), body["capacity_bits"]

    def detect(self, buffer: AudioBuffer, config: WatermarkConfig, num_bits: int) -> dict:
        return self._post(
            "/v1/detect",
            {
                "audio": AudioPayload.from_buffer(buffer).model_dump(),
                "num_bits": num_bits,
                "settings": settings_from_config(config).model_dump(),
            },
        )

    def attack(
        self, buffer: AudioBuffer, kind: str, snr_db: float = 40.0,
        intermediate_fs: int = 8000, bits: int = 8, command: str | None = None,
        seed: int = 0,
    ) -> AudioBuffer:
        body = self._post(
            "/v1/attack",
            {
                "audio": AudioPayload.from_buffer(buffer).model_dump(),
                "kind": kind,
                "snr_db": snr_db,
                "intermediate_fs": intermediate_fs,
                "bits": bits,
                "command": command,
                "seed": seed,
            },
        )
        return AudioPayload(**body["audio"]).to_buffer()

    def calibrate_corpus(self, corpus_dir: str, config: WatermarkConfig) -> dict:
        return self._post(
            "/v1/calibrate/corpus",
            {"corpus_dir": corpus_dir, "settings": settings_from_config(config).model_dump()},
        )

    def metrics(self, reference: str, detected: str) -> dict:
        return self._post("/v1/metrics", {"reference": reference, "detected": detected})

    def evaluate(
        self, corpus_dir: str, payloads: list[int] | None, attacks: list[str] | None,
        seed: int, calibrate: bool = True, config: WatermarkConfig | None = None,
    ) -> dict:
        return self._post(
            "/v1/evaluate",
            {
                "corpus_dir": corpus_dir,
                "payloads": payloads,
                "attacks": attacks,
                "seed": seed,
                "calibrate": calibrate,
                "settings": settings_from_config(config).model_dump() if config else None,
            },
        )
