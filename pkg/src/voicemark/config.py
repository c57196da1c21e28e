"""Plain key=value config files for detector settings, as written by the
calibrate command and consumed by detect."""
from __future__ import annotations

from pathlib import Path

from .watermark import WatermarkConfig

_FLOAT_KEYS = ("alpha0", "alpha1", "theta", "band_low_hz", "band_high_hz", "target_dbfs")
_INT_KEYS = ("payload_bps",)


def save_config(config: WatermarkConfig, path: str | Path, theta: float | None = None) -> None:
    resolved = theta if theta is not None else config.resolved_theta()
    lines = [
        f"alpha0 = {config.alpha0}",
        f"alpha1 = {config.alpha1}",
        f"payload_bps = {config.payload_bps}",
        f"theta = {resolved}",
        f"band_low_hz = {config.band[0]}",
        f"band_high_hz = {config.band[1]}",
        f"target_dbfs = {config.target_dbfs}",
    ]
    Path(path).write_text("\n".join(lines) + "\n")


def load_config(path: str | Path) -> dict:
    """Parse a key=value config file into typed values."""
    values: dict = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected 'key = value'")
        key, _, raw = line.partition("=")
        key, raw = key.strip(), raw.strip()
        if key in _FLOAT_KEYS:
            values[key] = float(raw)
        elif key in _INT_KEYS:
            values[key] = int(raw)
        else:
            raise ValueError(f"{path}:{lineno}: unknown config key {key!r}")
    return values


def config_from_file(path: str | Path, **overrides) -> WatermarkConfig:
    """Build a WatermarkConfig from a config file, with keyword overrides."""
    values = load_config(path)
    band = (
        values.pop("band_low_hz", 125.0),
        values.pop("band_high_hz", 1000.0),
    )
    values["band"] = band
    values.update({k: v for k, v in overrides.items() if v is not None})
    return WatermarkConfig(**values)
