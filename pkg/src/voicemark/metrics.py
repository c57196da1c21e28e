"""Watermark detection metrics: BER, confusion counts, FAR/FRR/F1.

Bit 1 is the positive class. Rates with a zero denominator are reported as
None (undefined), never silently zeroed.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class ConfusionCounts:
    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


@dataclass
class Rates:
    far: float | None
    frr: float | None
    f1: float | None


def _as_bits(stream) -> np.ndarray:
    bits = np.asarray(stream, dtype=int).reshape(-1)
    if bits.size and not np.all((bits == 0) | (bits == 1)):
        raise ValueError("bit-streams may contain only 0 and 1")
    return bits


def ber(reference, detected) -> float:
    """Fraction of differing positions between two equal-length bit-streams."""
    ref, det = _as_bits(reference), _as_bits(detected)
    if len(ref) != len(det):
        raise ValueError(f"length mismatch: {len(ref)} vs {len(det)}")
    if len(ref) == 0:
        raise ValueError("BER of empty streams is undefined")
    return float(np.mean(ref != det))


def confusion(reference, detected) -> ConfusionCounts:
    ref, det = _as_bits(reference), _as_bits(detected)
    if len(ref) != len(det):
        raise ValueError(f"length mismatch: {len(ref)} vs {len(det)}")
    return ConfusionCounts(
        tp=int(np.sum((ref == 1) & (det == 1))),
        fp=int(np.sum((ref == 0) & (det == 1))),
        tn=int(np.sum((ref == 0) & (det == 0))),
        fn=int(np.sum((ref == 1) & (det == 0))),
    )


def rates(counts: ConfusionCounts, macro: bool = False) -> Rates:
    """FAR = fp/(fp+tn), FRR = fn/(fn+tp), F1 = 2tp/(2tp+fp+fn).

    With macro=True the F1 is averaged over both classes instead of scoring
    the positive class alone.
    """
    far = counts.fp / (counts.fp + counts.tn) if counts.fp + counts.tn else None
    frr = counts.fn / (counts.fn + counts.tp) if counts.fn + counts.tp else None
    denom = 2 * counts.tp + counts.fp + counts.fn
    f1 = 2 * counts.tp / denom if denom else None
    if macro:
        denom0 = 2 * counts.tn + counts.fn + counts.fp
        f1_neg = 2 * counts.tn / denom0 if denom0 else None
        f1 = None if f1 is None or f1_neg is None else 0.5 * (f1 + f1_neg)
    return Rates(far, frr, f1)
