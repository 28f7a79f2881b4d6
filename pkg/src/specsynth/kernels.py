"""Render-kernel dispatch: compiled extension if built, numpy otherwise.

The selection happens once at import. Set ``SPECSYNTH_NO_EXT=1`` to force
the numpy fallback (used by the benchmark to compare both paths).
"""

from __future__ import annotations

import os

import numpy as np

from . import _kernels_np

try:
    from . import _speckern
except ImportError:
    _speckern = None

if _speckern is not None and not os.environ.get("SPECSYNTH_NO_EXT"):
    _impl = _speckern
else:
    _impl = _kernels_np

BACKEND = _impl.BACKEND_NAME

_VIEW_SIGNS = {"toward_camera": -1.0, "camera_to_point": 1.0}


def available_backends() -> dict[str, object]:
    """Backends importable in this build, keyed by name."""
    backends: dict[str, object] = {_kernels_np.BACKEND_NAME: _kernels_np}
    if _speckern is not None:
        backends[_speckern.BACKEND_NAME] = _speckern
    return backends


def render_highlight(points: np.ndarray, normals: np.ndarray,
                     valid: np.ndarray, light: np.ndarray,
                     r0: float, k_h: float, shininess: float,
                     view_convention: str = "toward_camera",
                     impl=None) -> np.ndarray:
    """Render the specular highlight intensity map with the selected backend.

    Args:
        points: (H, W, 3) float64 camera-space points.
        normals: (H, W, 3) float64 unit normals.
        valid: (H, W) bool validity mask; invalid pixels render as zero.
        light: (3,) light position, camera frame.
        r0: Fresnel reflectance at normal incidence, in [0, 1].
        k_h: global highlight intensity, > 0.
        shininess: Blinn-Phong exponent, > 0.
        view_convention: "toward_camera" (default) or "camera_to_point".
        impl: optional backend module override (for tests/benchmarks).

    Returns:
        (H, W) float32 highlight intensity in [0, 1].
    """
    try:
        view_sign = _VIEW_SIGNS[view_convention]
    except KeyError:
        raise ValueError(f"unknown view convention: {view_convention!r}") from None
    points = np.ascontiguousarray(points, dtype=np.float64)
    normals = np.ascontiguousarray(normals, dtype=np.float64)
    if points.ndim != 3 or points.shape[-1] != 3 or points.shape != normals.shape:
        raise ValueError(f"bad geometry shapes: {points.shape} vs {normals.shape}")
    if valid.shape != points.shape[:2]:
        raise ValueError(f"valid mask shape {valid.shape} does not match {points.shape[:2]}")
    light = np.ascontiguousarray(light, dtype=np.float64).reshape(3)
    backend = impl if impl is not None else _impl
    if backend is _kernels_np:
        valid_arg = valid.astype(bool)
    else:
        valid_arg = np.ascontiguousarray(valid, dtype=np.uint8)
    return backend.render_highlight(points, normals, valid_arg, light,
                                    float(r0), float(k_h), float(shininess),
                                    view_sign)
