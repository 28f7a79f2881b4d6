"""Core image value types and color operations.

Images are plain numpy arrays with a fixed convention used everywhere in
this package:

* linear image  -- float32, shape (H, W, 3), linear-light RGB in [0, 1]
* scalar map    -- float32 or float64, shape (H, W), finite values
* binary mask   -- bool, shape (H, W)

Pixel coordinates are row-major, y-down, x-right; ``(u, v)`` means
``(column, row)``.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "srgb_to_linear",
    "linear_to_srgb",
    "luminance",
    "rec709_luma",
    "clamp01",
    "check_linear_image",
    "check_scalar_map",
    "check_mask",
]

# sRGB transfer-curve breakpoints
_SRGB_ENC_KNEE = 0.0031308
_SRGB_DEC_KNEE = 0.04045


def srgb_to_linear(codes: np.ndarray) -> np.ndarray:
    """Decode 8/16-bit sRGB integer codes to linear-light float32 in [0, 1].

    Args:
        codes: uint8 or uint16 array, any shape (typically (H, W, 3)).

    Returns:
        float32 array of the same shape with the sRGB electro-optical
        transfer applied per channel.
    """
    if codes.dtype == np.uint8:
        maxcode = 255.0
    elif codes.dtype == np.uint16:
        maxcode = 65535.0
    else:
        raise ValueError(f"expected uint8 or uint16 codes, got {codes.dtype}")
    x = codes.astype(np.float64) / maxcode
    lin = np.where(x <= _SRGB_DEC_KNEE, x / 12.92, ((x + 0.055) / 1.055) ** 2.4)
    return lin.astype(np.float32)


def linear_to_srgb(img: np.ndarray, bits: int = 8) -> np.ndarray:
    """Encode linear-light values in [0, 1] to 8/16-bit sRGB codes.

    Values are clamped to [0, 1] before encoding; rounding is to nearest.
    """
    if bits == 8:
        maxcode, dtype = 255.0, np.uint8
    elif bits == 16:
        maxcode, dtype = 65535.0, np.uint16
    else:
        raise ValueError(f"bits must be 8 or 16, got {bits}")
    x = np.clip(img.astype(np.float64), 0.0, 1.0)
    y = np.where(x <= _SRGB_ENC_KNEE, 12.92 * x, 1.055 * x ** (1.0 / 2.4) - 0.055)
    return np.rint(y * maxcode).astype(dtype)


def luminance(img: np.ndarray) -> np.ndarray:
    """Per-pixel brightness as the unweighted mean of the three channels.

    Accumulates in float64, so a gray image maps to its gray level exactly.
    """
    if img.ndim != 3 or img.shape[-1] != 3:
        raise ValueError(f"expected an (H, W, 3) image, got shape {img.shape}")
    return img.mean(axis=-1, dtype=np.float64)


def rec709_luma(img: np.ndarray) -> np.ndarray:
    """Per-pixel Rec.709 luma (alternative brightness definition)."""
    if img.ndim != 3 or img.shape[-1] != 3:
        raise ValueError(f"expected an (H, W, 3) image, got shape {img.shape}")
    w = np.array([0.2126, 0.7152, 0.0722], dtype=np.float64)
    return img.astype(np.float64) @ w


def clamp01(x: np.ndarray) -> np.ndarray:
    """Clamp every value to [0, 1], preserving dtype."""
    return np.clip(x, 0.0, 1.0)


def check_linear_image(img: np.ndarray, name: str = "image") -> np.ndarray:
    """Validate an (H, W, 3) linear image: finite, in [0, 1], H,W >= 1."""
    if img.ndim != 3 or img.shape[-1] != 3:
        raise ValueError(f"{name}: expected shape (H, W, 3), got {img.shape}")
    if img.shape[0] < 1 or img.shape[1] < 1:
        raise ValueError(f"{name}: empty image {img.shape}")
    if not np.isfinite(img).all():
        raise ValueError(f"{name}: contains non-finite values")
    if img.min() < 0.0 or img.max() > 1.0:
        raise ValueError(f"{name}: values outside [0, 1]")
    return img


def check_scalar_map(m: np.ndarray, name: str = "map") -> np.ndarray:
    """Validate an (H, W) scalar map: 2-D and finite."""
    if m.ndim != 2:
        raise ValueError(f"{name}: expected shape (H, W), got {m.shape}")
    if not np.isfinite(m).all():
        raise ValueError(f"{name}: contains non-finite values")
    return m


def check_mask(mask: np.ndarray, shape: tuple[int, int] | None = None,
               name: str = "mask") -> np.ndarray:
    """Validate an (H, W) boolean mask, optionally against a companion shape."""
    if mask.ndim != 2 or mask.dtype != np.bool_:
        raise ValueError(f"{name}: expected a 2-D bool array, got "
                         f"{mask.dtype} {mask.shape}")
    if shape is not None and mask.shape != tuple(shape):
        raise ValueError(f"{name}: shape {mask.shape} does not match {shape}")
    return mask
