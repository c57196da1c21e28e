"""FastAPI application exposing the pipeline over HTTP.

Endpoints accept audio at any rate and resample to the 16 kHz pipeline rate
on ingest. Errors carry a machine-readable kind in the detail body:
io / validation / capacity / protocol / codec-unavailable / codec-failed.
"""
from __future__ import annotations

import numpy as np
from fastapi import FastAPI, HTTPException

from .. import __version__
from ..attacks import AttackSpec, AttackUnavailableError, CodecRunError, apply_attack
from ..audio_io import AudioBuffer
from ..dsp import resample
from ..evaluation import calibrate_corpus, render_report, run_evaluation
from ..mcadams import McAdamsParams, anonymize
from ..metrics import confusion, rates
from ..watermark import (
    PIPELINE_RATE,
    CapacityError,
    bits_from_string,
    bits_to_string,
    calibrate_threshold,
    detect,
    embed,
)
from . import schemas


def _error(status: int, kind: str, exc: Exception) -> HTTPException:
    return HTTPException(status_code=status, detail={"error": kind, "message": str(exc)})


def _ingest(payload: schemas.AudioPayload) -> AudioBuffer:
    buf = payload.to_buffer()
    if buf.sample_rate != PIPELINE_RATE:
        buf = resample(buf, PIPELINE_RATE)
    return buf


def create_app() -> FastAPI:
    app = FastAPI(
        title="voicemark",
        version=__version__,
        description="Speaker anonymization and watermarking by LPC pole-angle warping",
    )

    @app.get("/health", response_model=schemas.HealthResponse)
    def health() -> schemas.HealthResponse:
        return schemas.HealthResponse(status="ok", version=__version__)

    @app.post("/v1/anonymize", response_model=schemas.AnonymizeResponse)
    def anonymize_endpoint(req: schemas.AnonymizeRequest) -> schemas.AnonymizeResponse:
        try:
            params = McAdamsParams(req.alpha, req.subframe_ms, req.hop_ms, req.order)
            result = anonymize(_ingest(req.audio), params)
        except ValueError as exc:
            raise _error(400, "validation", exc)
        return schemas.AnonymizeResponse(
            audio=schemas.AudioPayload.from_buffer(result.audio),
            frames_total=result.frames_total,
            frames_passed_through=result.frames_passed_through,
        )

    @app.post("/v1/embed", response_model=schemas.EmbedResponse)
    def embed_endpoint(req: schemas.EmbedRequest) -> schemas.EmbedResponse:
        try:
            config = req.settings.to_config()
            buf = _ingest(req.audio)
            bits = bits_from_string(req.bits)
            marked = embed(buf, bits, config)
        except CapacityError as exc:
            raise _error(400, "capacity", exc)
        except ValueError as exc:
            raise _error(400, "validation", exc)
        return schemas.EmbedResponse(
            audio=schemas.AudioPayload.from_buffer(marked),
            capacity_bits=config.capacity(buf),
            bits_embedded=len(bits),
        )

    @app.post("/v1/detect", response_model=schemas.DetectResponse)
    def detect_endpoint(req: schemas.DetectRequest) -> schemas.DetectResponse:
        try:
            config = req.settings.to_config()
            report = detect(_ingest(req.audio), config, req.num_bits)
        except CapacityError as exc:
            raise _error(400, "protocol", exc)
        except ValueError as exc:
            raise _error(400, "validation", exc)
        return schemas.DetectResponse(
            bits=bits_to_string(report.bits),
            statistics=[float(s) for s in report.statistics],
            theta=report.theta,
            frame_len=report.frame_len,
        )

    @app.post("/v1/attack", response_model=schemas.AttackResponse)
    def attack_endpoint(req: schemas.AttackRequest) -> schemas.AttackResponse:
        try:
            spec = AttackSpec(
                kind=req.kind,
                snr_db=req.snr_db,
                intermediate_fs=req.intermediate_fs,
                bits=req.bits,
                command=req.command,
                seed=req.seed,
            )
            attacked = apply_attack(_ingest(req.audio), spec)
        except AttackUnavailableError as exc:
            raise _error(503, "codec-unavailable", exc)
        except CodecRunError as exc:
            raise _error(502, "codec-failed", exc)
        except ValueError as exc:
            raise _error(400, "validation", exc)
        return schemas.AttackResponse(audio=schemas.AudioPayload.from_buffer(attacked))

    @app.post("/v1/calibrate", response_model=schemas.CalibrateResponse)
    def calibrate_endpoint(req: schemas.CalibrateRequest) -> schemas.CalibrateResponse:
        try:
            result = calibrate_threshold(np.asarray(req.stat0), np.asarray(req.stat1))
        except ValueError as exc:
            raise _error(400, "validation", exc)
        return schemas.CalibrateResponse(
            theta=result.theta,
            balanced_error=result.balanced_error,
            separable=result.separable,
            frames0=len(req.stat0),
            frames1=len(req.stat1),
        )

    @app.post("/v1/calibrate/corpus", response_model=schemas.CalibrateResponse)
    def calibrate_corpus_endpoint(req: schemas.CorpusCalibrateRequest) -> schemas.CalibrateResponse:
        try:
            result, n0, n1 = calibrate_corpus(req.corpus_dir, req.settings.to_config())
        except FileNotFoundError as exc:
            raise _error(404, "io", exc)
        except ValueError as exc:
            raise _error(400, "validation", exc)
        return schemas.CalibrateResponse(
            theta=result.theta,
            balanced_error=result.balanced_error,
            separable=result.separable,
            frames0=n0,
            frames1=n1,
        )

    @app.post("/v1/metrics", response_model=schemas.MetricsResponse)
    def metrics_endpoint(req: schemas.MetricsRequest) -> schemas.MetricsResponse:
        try:
            ref = bits_from_string(req.reference)
            det = bits_from_string(req.detected)
            if len(ref) != len(det) or len(ref) == 0:
                raise ValueError(f"need equal non-empty streams, got {len(ref)} and {len(det)}")
            counts = confusion(ref, det)
            rr = rates(counts)
        except ValueError as exc:
            raise _error(400, "validation", exc)
        return schemas.MetricsResponse(
            ber=float(np.mean(ref != det)),
            tp=counts.tp,
            fp=counts.fp,
            tn=counts.tn,
            fn=counts.fn,
            far=rr.far,
            frr=rr.frr,
            f1=rr.f1,
        )

    @app.post("/v1/evaluate", response_model=schemas.EvaluateResponse)
    def evaluate_endpoint(req: schemas.EvaluateRequest) -> schemas.EvaluateResponse:
        try:
            report = run_evaluation(
                req.corpus_dir,
                payloads=req.payloads,
                attacks=req.attacks,
                seed=req.seed,
                config=req.settings.to_config() if req.settings else None,
                calibrate=req.calibrate,
            )
        except FileNotFoundError as exc:
            raise _error(404, "io", exc)
        except ValueError as exc:
            raise _error(400, "validation", exc)
        return schemas.EvaluateResponse(
            report_text=render_report(report),
            skipped_attacks=sorted(set(report.skipped)),
        )

    return app
