"""Command-line front end.

The CLI is a thin client: it handles local WAV/bit-stream/report files and
sends all signal processing to the service (in-process by default, or a
remote instance via --server / $VOICEMARK_SERVER).

Exit codes: 0 success, 2 I/O error, 3 capacity or validation error,
4 detection-protocol error, 5 external codec unavailable or failed.
"""
from __future__ import annotations

import sys
from pathlib import Path

import click

from . import __version__
from .audio_io import AudioBuffer, WavFormatError, read_wav, write_wav
from .client import ServiceError, VoicemarkClient
from .config import config_from_file
from .watermark import (
    WatermarkConfig,
    bits_from_image,
    bits_to_string,
    image_from_bits,
    read_bitstream,
)

EXIT_IO = 2
EXIT_VALIDATION = 3
EXIT_PROTOCOL = 4
EXIT_CODEC = 5

_KIND_EXIT = {
    "io": EXIT_IO,
    "capacity": EXIT_VALIDATION,
    "validation": EXIT_VALIDATION,
    "protocol": EXIT_PROTOCOL,
    "codec-unavailable": EXIT_CODEC,
    "codec-failed": EXIT_CODEC,
}


def _fail(code: int, message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _service_fail(exc: ServiceError) -> None:
    _fail(_KIND_EXIT.get(exc.kind, 1), exc.message)


def _read_input(path: str) -> AudioBuffer:
    try:
        return read_wav(path)
    except (FileNotFoundError, WavFormatError, OSError) as exc:
        _fail(EXIT_IO, str(exc))


def _write_output(buffer: AudioBuffer, path: str, bit_depth: int) -> None:
    try:
        clipped = write_wav(buffer, path, bit_depth)
    except OSError as exc:
        _fail(EXIT_IO, str(exc))
    if clipped:
        click.echo(f"warning: clipped {clipped} samples", err=True)


def _build_config(payload_bps, theta, alpha0, alpha1, band, target_dbfs, config_path) -> WatermarkConfig:
    try:
        if config_path:
            return config_from_file(
                config_path,
                payload_bps=payload_bps,
                theta=theta,
                alpha0=alpha0,
                alpha1=alpha1,
                band=band if band and band[0] is not None else None,
                target_dbfs=target_dbfs,
            )
        return WatermarkConfig(
            payload_bps=payload_bps,
            alpha0=alpha0 if alpha0 is not None else 0.6,
            alpha1=alpha1 if alpha1 is not None else 0.8,
            theta=theta,
            band=band if band and band[0] is not None else (125.0, 1000.0),
            target_dbfs=target_dbfs if target_dbfs is not None else -3.0,
        )
    except (ValueError, FileNotFoundError, OSError) as exc:
        _fail(EXIT_VALIDATION if isinstance(exc, ValueError) else EXIT_IO, str(exc))


@click.group()
@click.version_option(__version__)
@click.option("--server", envvar="VOICEMARK_SERVER", default=None, metavar="URL",
              help="Remote service URL; default runs the service in-process.")
@click.pass_context
def main(ctx: click.Context, server: str | None) -> None:
    """Speaker anonymization and watermarking toolkit."""
    ctx.obj = VoicemarkClient(base_url=server)


@main.command()
@click.argument("input_path", metavar="IN.wav")
@click.argument("output_path", metavar="OUT.wav")
@click.option("--alpha", type=float, required=True, help="McAdams coefficient (1.0 = identity).")
@click.option("--subframe-ms", type=float, default=20.0, show_default=True)
@click.option("--hop-ms", type=float, default=10.0, show_default=True)
@click.option("--order", type=int, default=20, show_default=True)
@click.option("--bit-depth", type=click.Choice(["16", "24", "32"]), default="16", show_default=True)
@click.pass_obj
def anonymize(client: VoicemarkClient, input_path, output_path, alpha, subframe_ms, hop_ms, order, bit_depth):
    """Anonymize a WAV file by pole-angle warping (output at 16 kHz)."""
    buffer = _read_input(input_path)
    try:
        audio, total, passed = client.anonymize(buffer, alpha, subframe_ms, hop_ms, order)
    except ServiceError as exc:
        _service_fail(exc)
    _write_output(audio, output_path, int(bit_depth))
    suffix = f" ({passed}/{total} sub-frames passed through)" if passed else ""
    click.echo(f"wrote {output_path}{suffix}")


@main.command()
@click.argument("input_path", metavar="IN.wav")
@click.argument("output_path", metavar="OUT.wav")
@click.option("--payload-bps", type=int, required=True, help="Watermark payload in bits/second.")
@click.option("--bits", "bits_text", default=None, help="Inline bit-stream, e.g. 0110.")
@click.option("--bits-file", type=click.Path(), default=None, help="File of '0'/'1' characters.")
@click.option("--image", "image_path", type=click.Path(), default=None, help="PBM image payload.")
@click.option("--alpha0", type=float, default=None, help="Coefficient for bit 0 [default 0.6].")
@click.option("--alpha1", type=float, default=None, help="Coefficient for bit 1 [default 0.8].")
@click.option("--target-dbfs", type=float, default=None, help="Peak normalization [default -3].")
@click.option("--config", "config_path", type=click.Path(), default=None, help="key=value config file.")
@click.option("--bit-depth", type=click.Choice(["16", "24", "32"]), default="16", show_default=True)
@click.pass_obj
def embed(client: VoicemarkClient, input_path, output_path, payload_bps, bits_text, bits_file,
          image_path, alpha0, alpha1, target_dbfs, config_path, bit_depth):
    """Embed a bit-stream or PBM image into a WAV file."""
    sources = [s for s in (bits_text, bits_file, image_path) if s is not None]
    if len(sources) != 1:
        _fail(EXIT_VALIDATION, "provide exactly one of --bits, --bits-file, --image")
    try:
        if image_path is not None:
            bits, (width, height) = bits_from_image(image_path)
            click.echo(f"image payload {width}x{height} -> {len(bits)} bits")
        elif bits_file is not None:
            bits = read_bitstream(bits_file)
        else:
            bits = [int(c) for c in bits_text if c in "01"]
    except (FileNotFoundError, OSError) as exc:
        _fail(EXIT_IO, str(exc))
    except ValueError as exc:
        _fail(EXIT_VALIDATION, str(exc))

    config = _build_config(payload_bps, None, alpha0, alpha1, None, target_dbfs, config_path)
    buffer = _read_input(input_path)
    try:
        marked, capacity = client.embed(buffer, bits_to_string(bits), config)
    except ServiceError as exc:
        if exc.kind == "capacity":
            _fail(EXIT_VALIDATION, exc.message)
        _service_fail(exc)
    _write_output(marked, output_path, int(bit_depth))
    click.echo(f"{len(bits)}/{capacity} bits embedded")


@main.command()
@click.argument("input_path", metavar="IN.wav")
@click.option("--payload-bps", type=int, required=True)
@click.option("--num-bits", type=int, default=None, help="Bits to read [default: full capacity].")
@click.option("--theta", type=float, default=None, help="Detection threshold override.")
@click.option("--band", nargs=2, type=float, default=(None, None), metavar="LOW HIGH",
              help="Detection band in Hz [default 125 1000].")
@click.option("--config", "config_path", type=click.Path(), default=None, help="key=value config file.")
@click.option("--report", "report_path", type=click.Path(), default=None, help="Write a detection report.")
@click.option("--image", "image_size", default=None, metavar="WxH",
              help="Reconstruct detected bits as a WxH PBM image.")
@click.option("--image-out", type=click.Path(), default=None, help="PBM output path for --image.")
@click.pass_obj
def detect(client: VoicemarkClient, input_path, payload_bps, num_bits, theta, band,
           config_path, report_path, image_size, image_out):
    """Blindly detect a watermark; prints the bits to standard output."""
    width = height = None
    if image_size is not None:
        try:
            width, height = (int(v) for v in image_size.lower().split("x"))
        except ValueError:
            _fail(EXIT_VALIDATION, f"--image expects WxH, got {image_size!r}")
        if image_out is None:
            _fail(EXIT_VALIDATION, "--image requires --image-out")
        if num_bits is None:
            num_bits = width * height

    config = _build_config(payload_bps, theta, None, None, band, None, config_path)
    buffer = _read_input(input_path)
    if num_bits is None:
        num_bits = config.capacity(buffer)
    try:
        result = client.detect(buffer, config, num_bits)
    except ServiceError as exc:
        if exc.kind in ("protocol", "capacity"):
            _fail(EXIT_PROTOCOL, exc.message)
        _service_fail(exc)

    click.echo(result["bits"])
    if report_path:
        lines = [
            "[detection]",
            f"theta = {result['theta']:.6f}",
            f"frame_len = {result['frame_len']}",
            f"num_bits = {len(result['bits'])}",
            f"bits = {result['bits']}",
            "[frames]",
        ]
        lines += [f"{k} {s:.6f} {b}" for k, (s, b) in enumerate(zip(result["statistics"], result["bits"]))]
        try:
            Path(report_path).write_text("\n".join(lines) + "\n")
        except OSError as exc:
            _fail(EXIT_IO, str(exc))
    if width is not None:
        try:
            image_from_bits([int(c) for c in result["bits"]], width, height, image_out)
        except ValueError as exc:
            _fail(EXIT_PROTOCOL, str(exc))
        click.echo(f"wrote {image_out}", err=True)


@main.command()
@click.argument("input_path", metavar="IN.wav")
@click.argument("output_path", metavar="OUT.wav")
@click.option("--name", required=True, metavar="ATTACK",
              help="normal | awgn[:SNR] | resample-8 | resample-24 | requant-8 | requant-24 | mp3 | flv | g723.1")
@click.option("--seed", type=int, default=0, show_default=True, help="Noise seed for awgn.")
@click.option("--command", default=None, help="Override the external codec command template.")
@click.option("--bit-depth", type=click.Choice(["16", "24", "32"]), default="16", show_default=True)
@click.pass_obj
def attack(client: VoicemarkClient, input_path, output_path, name, seed, command, bit_depth):
    """Apply one signal-processing attack to a WAV file."""
    from .attacks import AttackSpec

    try:
        spec = AttackSpec.parse(name, seed=seed)
    except ValueError as exc:
        _fail(EXIT_VALIDATION, str(exc))
    if command is not None:
        spec = AttackSpec("external_codec", command=command, seed=seed)
    buffer = _read_input(input_path)
    try:
        attacked = client.attack(
            buffer, spec.kind, snr_db=spec.snr_db, intermediate_fs=spec.intermediate_fs,
            bits=spec.bits, command=spec.command, seed=spec.seed,
        )
    except ServiceError as exc:
        _service_fail(exc)
    _write_output(attacked, output_path, int(bit_depth))
    click.echo(f"wrote {output_path}")


@main.command()
@click.argument("corpus_dir", metavar="CORPUS_DIR")
@click.option("--payload-bps", type=int, required=True)
@click.option("--band", nargs=2, type=float, default=(None, None), metavar="LOW HIGH")
@click.option("--alpha0", type=float, default=None)
@click.option("--alpha1", type=float, default=None)
@click.option("--out-config", type=click.Path(), required=True, help="Config file to write.")
@click.pass_obj
def calibrate(client: VoicemarkClient, corpus_dir, payload_bps, band, alpha0, alpha1, out_config):
    """Calibrate the detection threshold on a corpus of WAV files."""
    from .config import save_config

    config = _build_config(payload_bps, None, alpha0, alpha1, band, None, None)
    try:
        result = client.calibrate_corpus(corpus_dir, config)
    except ServiceError as exc:
        _service_fail(exc)
    if not result["separable"] and result["balanced_error"] >= 0.5:
        click.echo("warning: statistics are not separable; writing the pooled median", err=True)
    try:
        save_config(config, out_config, theta=result["theta"])
    except OSError as exc:
        _fail(EXIT_IO, str(exc))
    click.echo(
        f"theta = {result['theta']:.6f} (balanced error {result['balanced_error']:.4f}, "
        f"{result['frames0']}+{result['frames1']} frames)"
    )
    click.echo(f"wrote {out_config}")


@main.command()
@click.argument("corpus_dir", metavar="CORPUS_DIR")
@click.option("--payloads", default="2,4,8,16,32", show_default=True, help="Comma-separated bps list.")
@click.option("--attacks", "attack_names",
              default="normal,awgn,resample-8,resample-24,requant-8,requant-24",
              show_default=True, help="Comma-separated attack cases.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--report", "report_path", type=click.Path(), required=True)
@click.option("--calibrate/--no-calibrate", "do_calibrate", default=True, show_default=True,
              help="Calibrate thresholds on the corpus before scoring.")
@click.pass_obj
def evaluate(client: VoicemarkClient, corpus_dir, payloads, attack_names, seed, report_path, do_calibrate):
    """Run the robustness sweep and write a structured report."""
    try:
        payload_list = [int(p) for p in payloads.split(",") if p]
    except ValueError:
        _fail(EXIT_VALIDATION, f"bad --payloads value: {payloads!r}")
    attack_list = [a.strip() for a in attack_names.split(",") if a.strip()]
    try:
        result = client.evaluate(corpus_dir, payload_list, attack_list, seed, calibrate=do_calibrate)
    except ServiceError as exc:
        _service_fail(exc)
    try:
        Path(report_path).write_text(result["report_text"])
    except OSError as exc:
        _fail(EXIT_IO, str(exc))
    for skipped in result["skipped_attacks"]:
        click.echo(f"skipped unavailable attack: {skipped}", err=True)
    tail = [line for line in result["report_text"].splitlines() if line.startswith("payload_bps=")]
    for line in tail:
        click.echo(line)
    click.echo(f"wrote {report_path}")


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8374, show_default=True)
def serve(host: str, port: int) -> None:
    """Run the HTTP service."""
    import uvicorn

    from .service.app import create_app

    uvicorn.run(create_app(), host=host, port=port)


if __name__ == "__main__":
    main()
