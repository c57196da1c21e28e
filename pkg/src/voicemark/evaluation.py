"""Corpus-level runs: threshold calibration and the robustness sweep
(utterance x payload x attack), producing a self-describing text report."""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .attacks import NATIVE_ATTACKS, AttackSpec, AttackUnavailableError, apply_attack
from .audio_io import AudioBuffer, read_wav
from .dsp import resample
from .metrics import confusion, rates
from .watermark import (
    PIPELINE_RATE,
    CalibrationResult,
    WatermarkConfig,
    calibrate_threshold,
    detection_statistics,
    prepare_streams,
    switch_frames,
)

DEFAULT_PAYLOADS = (2, 4, 8, 16, 32)
DEFAULT_ATTACKS = NATIVE_ATTACKS


@dataclass(eq=False)
class EvalRecord:
    file: str
    payload_bps: int
    attack: str
    num_bits: int
    ber: float
    far: float | None
    frr: float | None
    f1: float | None


@dataclass(eq=False)
class Aggregate:
    payload_bps: int
    attack: str
    mean_ber: float
    mean_far: float | None
    mean_frr: float | None
    mean_f1: float | None


@dataclass(eq=False)
class RunReport:
    version: str
    seed: int
    payloads: list[int]
    attacks: list[str]
    calibrated: bool
    config: dict
    thetas: dict[int, float]
    files: list[str]
    records: list[EvalRecord] = field(default_factory=list)
    aggregates: list[Aggregate] = field(default_factory=list)
    skipped: list[str] = field(default_factory=list)


def load_corpus(corpus_dir: str | Path) -> list[tuple[str, AudioBuffer]]:
    """Read every WAV in a directory (sorted by name), resampled to 16 kHz."""
    paths = sorted(Path(corpus_dir).glob("*.wav"))
    if not paths:
        raise FileNotFoundError(f"no WAV files in {corpus_dir}")
    out = []
    for p in paths:
        buf = read_wav(p)
        if buf.sample_rate != PIPELINE_RATE:
            buf = resample(buf, PIPELINE_RATE)
        out.append((p.name, buf))
    return out


def calibrate_corpus(
    corpus_dir: str | Path, config: WatermarkConfig
) -> tuple[CalibrationResult, int, int]:
    """Gather per-frame detection statistics from the two anonymized streams
    of every corpus utterance and calibrate the threshold on them."""
    stat0, stat1 = [], []
    for _, buf in load_corpus(corpus_dir):
        a0, a1 = prepare_streams(buf, config)
        stat0.append(detection_statistics(a0, config))
        stat1.append(detection_statistics(a1, config))
    s0, s1 = np.concatenate(stat0), np.concatenate(stat1)
    return calibrate_threshold(s0, s1), len(s0), len(s1)


def _fmt(value: float | None) -> str:
    return "undefined" if value is None else f"{value:.6f}"


def _mean_or_none(values: list[float | None]) -> float | None:
    defined = [v for v in values if v is not None]
    return float(np.mean(defined)) if defined else None


def run_evaluation(
    corpus_dir: str | Path,
    payloads: list[int] | None = None,
    attacks: list[str] | None = None,
    seed: int = 0,
    config: WatermarkConfig | None = None,
    calibrate: bool = True,
) -> RunReport:
    """Embed seeded random bits, attack, detect, and score for every
    utterance x payload x attack combination.

    Deterministic under a fixed seed: payload bits and attack noise are
    seeded per (utterance, payload, attack). Unavailable external codecs
    are recorded as skipped, never raised.
    """
    payloads = list(payloads) if payloads else list(DEFAULT_PAYLOADS)
    attacks = list(attacks) if attacks else list(DEFAULT_ATTACKS)
    base = config or WatermarkConfig(payload_bps=payloads[0])
    corpus = load_corpus(corpus_dir)

    def cfg_for(bps: int, theta: float | None = None) -> WatermarkConfig:
        return WatermarkConfig(
            payload_bps=bps,
            alpha0=base.alpha0,
            alpha1=base.alpha1,
            theta=theta if theta is not None else base.theta,
            band=base.band,
            bpf=base.bpf,
            target_dbfs=base.target_dbfs,
            subframe_ms=base.subframe_ms,
            hop_ms=base.hop_ms,
            lpc_order=base.lpc_order,
        )

    # the anonymized streams do not depend on the payload, so prepare once
    streams = [prepare_streams(buf, cfg_for(payloads[0])) for _, buf in corpus]

    thetas: dict[int, float] = {}
    for bps in payloads:
        cfg = cfg_for(bps)
        if calibrate:
            s0 = np.concatenate([detection_statistics(a0, cfg) for a0, _ in streams])
            s1 = np.concatenate([detection_statistics(a1, cfg) for _, a1 in streams])
            thetas[bps] = calibrate_threshold(s0, s1).theta
        else:
            thetas[bps] = cfg.resolved_theta()

    report = RunReport(
        version=__version__,
        seed=seed,
        payloads=payloads,
        attacks=attacks,
        calibrated=calibrate,
        config={
            "alpha0": base.alpha0,
            "alpha1": base.alpha1,
            "band_low_hz": base.band[0],
            "band_high_hz": base.band[1],
            "bpf_low_hz": base.bpf[0],
            "bpf_high_hz": base.bpf[1],
            "target_dbfs": base.target_dbfs,
            "subframe_ms": base.subframe_ms,
            "hop_ms": base.hop_ms,
            "lpc_order": base.lpc_order,
        },
        thetas=thetas,
        files=[name for name, _ in corpus],
    )

    unavailable: set[str] = set()
    for ui, (name, buf) in enumerate(corpus):
        a0, a1 = streams[ui]
        for bps in payloads:
            cfg = cfg_for(bps, theta=thetas[bps])
            num_bits = cfg.capacity(buf)
            bits = np.random.default_rng([seed, ui, bps]).integers(0, 2, num_bits)
            marked = switch_frames(a0, a1, bits, cfg.frame_len(buf.sample_rate))
            for ai, attack_name in enumerate(attacks):
                if attack_name in unavailable:
                    continue
                spec = AttackSpec.parse(attack_name, seed=int(np.random.default_rng([seed, ui, bps, ai]).integers(0, 2**31)))
                try:
                    attacked = apply_attack(marked, spec)
                except AttackUnavailableError:
                    unavailable.add(attack_name)
                    report.skipped.append(attack_name)
                    continue
                detected = (detection_statistics(attacked, cfg)[:num_bits] > thetas[bps]).astype(int)
                counts = confusion(bits, detected)
                rr = rates(counts)
                report.records.append(
                    EvalRecord(
                        file=name,
                        payload_bps=bps,
                        attack=attack_name,
                        num_bits=num_bits,
                        ber=float(np.mean(bits != detected)),
                        far=rr.far,
                        frr=rr.frr,
                        f1=rr.f1,
                    )
                )

    for bps in payloads:
        for attack_name in attacks:
            recs = [r for r in report.records if r.payload_bps == bps and r.attack == attack_name]
            if not recs:
                continue
            report.aggregates.append(
                Aggregate(
                    payload_bps=bps,
                    attack=attack_name,
                    mean_ber=float(np.mean([r.ber for r in recs])),
                    mean_far=_mean_or_none([r.far for r in recs]),
                    mean_frr=_mean_or_none([r.frr for r in recs]),
                    mean_f1=_mean_or_none([r.f1 for r in recs]),
                )
            )
    return report


def render_report(report: RunReport) -> str:
    """Render a RunReport as a diffable key=value text document."""
    lines = [
        "# voicemark evaluation report",
        "[run]",
        f"version = {report.version}",
        f"seed = {report.seed}",
        f"payloads = {','.join(str(p) for p in report.payloads)}",
        f"attacks = {','.join(report.attacks)}",
        f"calibrated = {str(report.calibrated).lower()}",
        f"files = {','.join(report.files)}",
    ]
    if report.skipped:
        lines.append(f"skipped_attacks = {','.join(sorted(set(report.skipped)))}")
    lines.append("[config]")
    for key, value in report.config.items():
        lines.append(f"{key} = {value}")
    for bps in report.payloads:
        lines.append(f"theta_{bps}bps = {report.thetas[bps]:.6f}")
    lines.append("[records]")
    for r in report.records:
        lines.append(
            f"file={r.file} payload_bps={r.payload_bps} attack={r.attack} "
            f"num_bits={r.num_bits} ber={r.ber:.6f} far={_fmt(r.far)} "
            f"frr={_fmt(r.frr)} f1={_fmt(r.f1)}"
        )
    lines.append("[aggregates]")
    for a in report.aggregates:
        lines.append(
            f"payload_bps={a.payload_bps} attack={a.attack} mean_ber={a.mean_ber:.6f} "
            f"mean_far={_fmt(a.mean_far)} mean_frr={_fmt(a.mean_frr)} mean_f1={_fmt(a.mean_f1)}"
        )
    return "\n".join(lines) + "\n"
