"""Evaluation metrics for highlight removal.

Full-reference: MSE restricted to a highlight mask, PSNR, SSIM.
No-reference: a luminance suppression ratio (LSR) measuring how much of
the highlight regions' luminance excess over the background survives in
the output, normalized so uniform global dimming scores 1.0. The exact
LSR recipe is this library's stand-in (tagged ``lsr_standin_v1`` in
reports); it is pinned by three anchor cases: identity input scores 1,
pulling highlight luminance down to the background mean scores 0, and
globally dimmed output scores 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .image import luminance
from .ssim import ssim as _ssim_value

__all__ = [
    "MetricReport",
    "LSR_DEFINITION",
    "mse_masked",
    "psnr",
    "ssim",
    "lsr",
    "evaluate_pair",
]

LSR_DEFINITION = "lsr_standin_v1"
_LSR_DELTA = 1e-6


@dataclass
class MetricReport:
    """Per-image metric values; None marks a metric undefined for the pair."""

    mse_m: float | None
    psnr: float
    ssim: float
    lsr: float | None
    mask_coverage: float


def mse_masked(pred: np.ndarray, ref: np.ndarray, mask: np.ndarray) -> float:
    """Mean squared error over mask pixels and channels. Empty mask errors."""
    if pred.shape != ref.shape:
        raise ValueError(f"shape mismatch: {pred.shape} vs {ref.shape}")
    if mask.shape != pred.shape[:2]:
        raise ValueError(f"mask shape {mask.shape} does not match image")
    if not mask.any():
        raise ValueError("mse_masked is undefined for an empty mask")
    d = pred.astype(np.float64) - ref.astype(np.float64)
    return float((d[mask] ** 2).mean())


def psnr(pred: np.ndarray, ref: np.ndarray) -> float:
    """Peak signal-to-noise ratio in dB for unit dynamic range.

    Identical images return math.inf (serialized as the string "inf").
    """
    if pred.shape != ref.shape:
        raise ValueError(f"shape mismatch: {pred.shape} vs {ref.shape}")
    d = pred.astype(np.float64) - ref.astype(np.float64)
    mse = float((d ** 2).mean())
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(1.0 / mse)


def ssim(pred: np.ndarray, ref: np.ndarray) -> float:
    """Mean windowed SSIM (canonical constants; images must be >= 11x11)."""
    return _ssim_value(pred, ref)


def lsr(input_img: np.ndarray, output_img: np.ndarray,
        hl_mask: np.ndarray) -> float:
    """Residual highlight luminance excess, immune to global dimming.

    Each image's excess of mean highlight-region luminance over mean
    background luminance is normalized by its own background level; LSR is
    the clamped ratio of output to input relative excess. 0 means the
    highlight regions are no brighter than the background; 1 means no
    suppression (or a purely global intensity change).

    Raises if the mask or its complement is empty, or if the input shows
    no luminance excess to suppress.
    """
    if input_img.shape != output_img.shape:
        raise ValueError(f"shape mismatch: {input_img.shape} vs {output_img.shape}")
    if hl_mask.shape != input_img.shape[:2]:
        raise ValueError("mask shape does not match images")
    if not hl_mask.any() or hl_mask.all():
        raise ValueError("LSR needs a non-empty mask with a non-empty complement")

    y_in = luminance(input_img.astype(np.float64))
    y_out = luminance(output_img.astype(np.float64))
    bg = ~hl_mask

    in_bg = float(y_in[bg].mean())
    in_excess = float(y_in[hl_mask].mean()) - in_bg
    if in_excess <= 0.0:
        raise ValueError("input has no highlight luminance excess to suppress")
    out_bg = float(y_out[bg].mean())
    out_excess = float(y_out[hl_mask].mean()) - out_bg

    rel_in = in_excess / max(_LSR_DELTA, in_bg)
    rel_out = out_excess / max(_LSR_DELTA, out_bg)
    return max(0.0, rel_out) / max(_LSR_DELTA, rel_in)


def evaluate_pair(pred: np.ndarray, ref: np.ndarray,
                  mask: np.ndarray | None = None,
                  input_img: np.ndarray | None = None) -> MetricReport:
    """All metrics for one prediction/reference pair.

    The MSE mask comes from ``mask`` when given, otherwise from luminance
    thresholding on ``input_img`` when available; an unusable (empty) mask
    yields mse_m = None. LSR needs ``input_img`` plus a usable mask and is
    None when either is missing or the input has no excess.
    """
    from .compositing import detect_dataset_highlights

    if mask is None and input_img is not None:
        mask = detect_dataset_highlights(input_img)
    coverage = float(mask.mean()) if mask is not None else 0.0

    mse_val = None
    if mask is not None and mask.any():
        mse_val = mse_masked(pred, ref, mask)

    lsr_val = None
    if input_img is not None and mask is not None:
        try:
            lsr_val = lsr(input_img, pred, mask)
        except ValueError:
            lsr_val = None

    return MetricReport(
        mse_m=mse_val,
        psnr=psnr(pred, ref),
        ssim=ssim(pred, ref),
        lsr=lsr_val,
        mask_coverage=coverage,
    )
