"""Compositing the rendered lobe and building supervision/hole masks.

Mask conventions: ``dataset_hl`` flags saturated regions already present in
the source image; ``m_sup`` (its complement) marks pixels whose ground
truth is trustworthy; ``m_hole`` is everything a model must inpaint, the
union of synthetic and dataset highlights. Patch-grid variants pool the
continuous maps over p x p cells and threshold the cell mean. All
thresholds use strict inequality.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .image import check_linear_image, luminance, rec709_luma
from .shading import ShadingParams

__all__ = [
    "MaskSet",
    "SynthesisPair",
    "composite",
    "detect_dataset_highlights",
    "avg_pool",
    "build_masks",
]

DEFAULT_TAU_L = 0.95
DEFAULT_PIXEL_THRESH = 0.05
DEFAULT_PATCH_THRESH = 0.10
DEFAULT_PATCH_SIZE = 16


@dataclass
class MaskSet:
    """Pixel- and patch-level supervision masks for one synthesized sample."""

    dataset_hl: np.ndarray    # (H, W) bool, saturated pixels in the source
    synthetic_hl: np.ndarray  # (H, W) bool, rendered lobe above pixel_thresh
    m_sup: np.ndarray         # (H, W) bool, trustworthy supervision
    m_hole: np.ndarray        # (H, W) bool, union of both highlight kinds
    patch_sup: np.ndarray     # (Hp, Wp) bool
    patch_hole: np.ndarray    # (Hp, Wp) bool
    patch_train: np.ndarray   # (Hp, Wp) bool, patch_hole & patch_sup
    patch_size: int


@dataclass
class SynthesisPair:
    """A clean/highlighted training pair with its masks and draw parameters."""

    clean: np.ndarray        # (H, W, 3) float32
    highlighted: np.ndarray  # (H, W, 3) float32, clamp01(clean + k_h * H)
    highlight: np.ndarray    # (H, W) float32 soft intensity
    masks: MaskSet
    params: ShadingParams


def composite(clean: np.ndarray, highlight: np.ndarray, k_h: float) -> np.ndarray:
    """Additively blend the highlight lobe onto the image.

    out = (1 - H) * I + H * (I + k_h), which reduces to
    clamp01(I + k_h * H) per channel. H == 0 is a bit-exact identity.
    """
    check_linear_image(clean)
    if highlight.shape != clean.shape[:2]:
        raise ValueError(f"highlight shape {highlight.shape} does not match "
                         f"image {clean.shape[:2]}")
    out = clean + np.float32(k_h) * highlight.astype(np.float32)[..., None]
    return np.clip(out, np.float32(0.0), np.float32(1.0))


def detect_dataset_highlights(img: np.ndarray, tau_l: float = DEFAULT_TAU_L,
                              luma: str = "mean") -> np.ndarray:
    """Flag pixels whose brightness strictly exceeds the luminance cutoff.

    ``luma`` selects the brightness definition: "mean" (channel average,
    the default, consistent with the bright-pixel penalty in the losses)
    or "rec709".
    """
    if not 0.0 < tau_l <= 1.0:
        raise ValueError(f"tau_l must be in (0, 1], got {tau_l}")
    img64 = np.asarray(img, dtype=np.float64)
    if luma == "mean":
        b = luminance(img64)
    elif luma == "rec709":
        b = rec709_luma(img64)
    else:
        raise ValueError(f"unknown luma mode: {luma!r}")
    return b > tau_l


def avg_pool(m: np.ndarray, patch_size: int) -> np.ndarray:
    """Mean of each p x p cell, zero-padding ragged right/bottom edges.

    Padding zeros count toward the cell mean, so the pooling is a total
    function of the input shape. Accumulates in float64.
    """
    if patch_size < 1:
        raise ValueError("patch_size must be >= 1")
    h, w = m.shape
    hp = -(-h // patch_size)
    wp = -(-w // patch_size)
    padded = np.zeros((hp * patch_size, wp * patch_size), dtype=np.float64)
    padded[:h, :w] = m
    return padded.reshape(hp, patch_size, wp, patch_size).mean(axis=(1, 3))


def build_masks(synth_h: np.ndarray, dataset_hl: np.ndarray,
                pixel_thresh: float = DEFAULT_PIXEL_THRESH,
                patch_size: int = DEFAULT_PATCH_SIZE,
                patch_thresh: float = DEFAULT_PATCH_THRESH) -> MaskSet:
    """Derive the full pixel- and patch-level mask set for one sample.

    Pixel level: synthetic_hl = {synth_h > pixel_thresh},
    m_hole = synthetic_hl | dataset_hl, m_sup = ~dataset_hl.
    Patch level: the soft highlight map (for holes) and the dataset
    indicator (for supervision exclusion) are average-pooled over
    patch_size cells and compared against patch_thresh; the trainable set
    is patch_hole & patch_sup.
    """
    if synth_h.shape != dataset_hl.shape:
        raise ValueError(f"shape mismatch: {synth_h.shape} vs {dataset_hl.shape}")
    if not (0.0 <= pixel_thresh <= 1.0 and 0.0 <= patch_thresh <= 1.0):
        raise ValueError("thresholds must be in [0, 1]")
    synthetic_hl = synth_h > pixel_thresh
    m_hole = synthetic_hl | dataset_hl
    m_sup = ~dataset_hl

    patch_hole = avg_pool(synth_h.astype(np.float64), patch_size) > patch_thresh
    patch_excl = avg_pool(dataset_hl.astype(np.float64), patch_size) > patch_thresh
    patch_sup = ~patch_excl
    return MaskSet(
        dataset_hl=dataset_hl.astype(bool),
        synthetic_hl=synthetic_hl,
        m_sup=m_sup,
        m_hole=m_hole,
        patch_sup=patch_sup,
        patch_hole=patch_hole,
        patch_train=patch_hole & patch_sup,
        patch_size=patch_size,
    )
