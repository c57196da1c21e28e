"""Speaker anonymization and watermarking by LPC pole-angle warping.

The pipeline anonymizes speech by raising the angles of complex LPC poles
to a configurable exponent (the McAdams coefficient), embeds binary
watermarks by frame-wise switching between two anonymized streams, and
detects them blindly by thresholding a low-band power ratio.
"""

__version__ = "0.1.0"

from .audio_io import AudioBuffer, read_wav, write_wav
from .mcadams import McAdamsParams, anonymize
from .watermark import WatermarkConfig, embed, detect, calibrate_threshold
from .attacks import AttackSpec, apply_attack
from .metrics import ber, confusion, rates

__all__ = [
    "__version__",
    "AudioBuffer",
    "read_wav",
    "write_wav",
    "McAdamsParams",
    "anonymize",
    "WatermarkConfig",
    "embed",
    "detect",
    "calibrate_threshold",
    "AttackSpec",
    "apply_attack",
    "ber",
    "confusion",
    "rates",
]
