"""Windowed structural similarity (SSIM) with the canonical constants.

11x11 Gaussian window (sigma 1.5), K1 = 0.01, K2 = 0.03, dynamic range 1.
Statistics are computed per channel on valid (fully covered) windows only,
so the SSIM map of an (H, W) image has shape (H-10, W-10). All arithmetic
is float64.
"""

from __future__ import annotations

import numpy as np
from scipy.ndimage import correlate1d

__all__ = ["WINDOW_SIZE", "ssim_map", "ssim", "masked_ssim_mean"]

WINDOW_SIZE = 11
_SIGMA = 1.5
_K1 = 0.01
_K2 = 0.03
_HALF = WINDOW_SIZE // 2


def _gaussian_kernel() -> np.ndarray:
    x = np.arange(WINDOW_SIZE, dtype=np.float64) - _HALF
    k = np.exp(-(x ** 2) / (2.0 * _SIGMA ** 2))
    return k / k.sum()


_KERNEL = _gaussian_kernel()


def _filter_valid(img: np.ndarray) -> np.ndarray:
    """Separable Gaussian filter, cropped to fully covered windows."""
    out = correlate1d(img, _KERNEL, axis=0, mode="constant")
    out = correlate1d(out, _KERNEL, axis=1, mode="constant")
    return out[_HALF:-_HALF, _HALF:-_HALF]


def _as_channels(img: np.ndarray) -> np.ndarray:
    a = np.asarray(img, dtype=np.float64)
    if a.ndim == 2:
        a = a[..., None]
    if a.ndim != 3:
        raise ValueError(f"expected (H, W) or (H, W, C), got {img.shape}")
    return a


def ssim_map(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Per-channel SSIM over valid windows; shape (H-10, W-10, C)."""
    a = _as_channels(a)
    b = _as_channels(b)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    h, w = a.shape[:2]
    if h < WINDOW_SIZE or w < WINDOW_SIZE:
        raise ValueError(f"image {h}x{w} smaller than the {WINDOW_SIZE}x"
                         f"{WINDOW_SIZE} SSIM window")
    c1 = _K1 ** 2
    c2 = _K2 ** 2

    maps = []
    for ch in range(a.shape[2]):
        x, y = a[..., ch], b[..., ch]
        mu_x = _filter_valid(x)
        mu_y = _filter_valid(y)
        var_x = _filter_valid(x * x) - mu_x * mu_x
        var_y = _filter_valid(y * y) - mu_y * mu_y
        cov = _filter_valid(x * y) - mu_x * mu_y
        num = (2.0 * mu_x * mu_y + c1) * (2.0 * cov + c2)
        den = (mu_x ** 2 + mu_y ** 2 + c1) * (var_x + var_y + c2)
        maps.append(num / den)
    return np.stack(maps, axis=-1)


def ssim(a: np.ndarray, b: np.ndarray) -> float:
    """Mean SSIM over the valid map and all channels."""
    return float(ssim_map(a, b).mean())


def masked_ssim_mean(a: np.ndarray, b: np.ndarray, mask: np.ndarray) -> float:
    """Mean SSIM over the pixels of ``mask`` that have fully covered windows.

    The mask is cropped by the window half-width on every side to align it
    with the valid SSIM map. If no mask pixel survives the crop, returns
    1.0 (no structural evidence, zero loss contribution).
    """
    m = ssim_map(a, b)
    inner = mask[_HALF:-_HALF, _HALF:-_HALF]
    if not inner.any():
        return 1.0
    return float(m[inner].mean())
