"""Camera geometry: back-projection, depth-gradient normals, shading directions.

All 3-D quantities live in the camera frame (x right, y down, z forward,
meters). Geometry buffers are computed and stored in float64; the rendered
highlight maps downstream are emitted as float32.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "CameraIntrinsics",
    "GeometryBuffers",
    "DirectionField",
    "backproject",
    "normals_from_depth",
    "build_geometry",
    "direction_field",
]

# below this, l+v is treated as degenerate and the pixel invalidated
_HALF_VECTOR_EPS = 1e-8


@dataclass(frozen=True)
class CameraIntrinsics:
    """Pinhole intrinsics (zero skew): focal lengths and principal point, pixels."""

    fx: float
    fy: float
    cx: float
    cy: float

    def __post_init__(self):
        if self.fx <= 0 or self.fy <= 0:
            raise ValueError(f"focal lengths must be positive, got fx={self.fx}, fy={self.fy}")

    def to_dict(self) -> dict:
        return {"fx": self.fx, "fy": self.fy, "cx": self.cx, "cy": self.cy}

    @classmethod
    def from_dict(cls, d: dict) -> "CameraIntrinsics":
        return cls(fx=float(d["fx"]), fy=float(d["fy"]),
                   cx=float(d["cx"]), cy=float(d["cy"]))


@dataclass
class GeometryBuffers:
    """Per-pixel depth, camera-space points, unit normals, and validity."""

    depth: np.ndarray    # (H, W) float64, meters
    points: np.ndarray   # (H, W, 3) float64
    normals: np.ndarray  # (H, W, 3) float64, unit on valid pixels
    valid: np.ndarray    # (H, W) bool
    intrinsics: CameraIntrinsics

    @property
    def shape(self) -> tuple[int, int]:
        return self.depth.shape


@dataclass
class DirectionField:
    """Per-pixel unit view/light/half vectors for shading."""

    view: np.ndarray   # (H, W, 3) float64
    light: np.ndarray  # (H, W, 3) float64
    half: np.ndarray   # (H, W, 3) float64
    valid: np.ndarray  # (H, W) bool


def _pixel_rays(height: int, width: int, intr: CameraIntrinsics) -> np.ndarray:
    """Unnormalized ray directions K^-1 (u, v, 1) per pixel, float64."""
    u = np.arange(width, dtype=np.float64)
    v = np.arange(height, dtype=np.float64)
    xn = (u - intr.cx) / intr.fx
    yn = (v - intr.cy) / intr.fy
    rays = np.empty((height, width, 3), dtype=np.float64)
    rays[:, :, 0] = xn[None, :]
    rays[:, :, 1] = yn[:, None]
    rays[:, :, 2] = 1.0
    return rays


def backproject(depth: np.ndarray, intr: CameraIntrinsics,
                valid: np.ndarray | None = None) -> np.ndarray:
    """Lift each pixel to its camera-space 3-D point.

    X(u, v) = D(u, v) * ((u - cx)/fx, (v - cy)/fy, 1).

    Raises ValueError if any valid pixel has non-positive depth. Invalid
    pixels get a zero point.
    """
    depth = np.asarray(depth, dtype=np.float64)
    if depth.ndim != 2:
        raise ValueError(f"depth must be 2-D, got {depth.shape}")
    h, w = depth.shape
    if valid is None:
        valid = np.isfinite(depth) & (depth > 0)
    elif (depth[valid] <= 0).any():
        raise ValueError("non-positive depth on valid pixels")
    points = _pixel_rays(h, w, intr) * depth[:, :, None]
    points[~valid] = 0.0
    return points


def normals_from_depth(depth: np.ndarray, intr: CameraIntrinsics,
                       valid: np.ndarray | None = None
                       ) -> tuple[np.ndarray, np.ndarray]:
    """Estimate camera-facing unit normals from a depth map alone.

    The tangent along each image axis is the central difference of the
    back-projected point field, falling back to a one-sided difference when
    only one neighbor is usable (image borders, holes in the validity
    mask). The normal is the normalized cross product of the two tangents,
    flipped so it faces the camera (n . X <= 0). Pixels without a usable
    tangent pair, or with a degenerate cross product, come back invalid.

    Returns:
        (normals, valid_out): (H, W, 3) float64 and the surviving validity.
    """
    depth = np.asarray(depth, dtype=np.float64)
    h, w = depth.shape
    if valid is None:
        valid = np.isfinite(depth) & (depth > 0)
    points = backproject(depth, intr, valid)

    # pad with an invalid border so every pixel has four addressable neighbors
    pts = np.zeros((h + 2, w + 2, 3), dtype=np.float64)
    pts[1:-1, 1:-1] = points
    vld = np.zeros((h + 2, w + 2), dtype=bool)
    vld[1:-1, 1:-1] = valid

    c = pts[1:-1, 1:-1]
    vc = vld[1:-1, 1:-1]

    def tangent(p_plus, v_plus, p_minus, v_minus):
        both = v_plus & v_minus
        t = np.where(both[..., None], p_plus - p_minus,
                     np.where(v_plus[..., None], p_plus - c, c - p_minus))
        ok = (v_plus | v_minus) & vc
        return t, ok

    tx, okx = tangent(pts[1:-1, 2:], vld[1:-1, 2:], pts[1:-1, :-2], vld[1:-1, :-2])
    ty, oky = tangent(pts[2:, 1:-1], vld[2:, 1:-1], pts[:-2, 1:-1], vld[:-2, 1:-1])

    n = np.cross(tx, ty)
    norm = np.linalg.norm(n, axis=-1)
    ok = okx & oky & (norm > 1e-15)
    n = np.divide(n, norm[..., None], out=np.zeros_like(n), where=ok[..., None])

    # orient toward the camera: flip where n points away (n . X > 0)
    flip = (n * c).sum(axis=-1) > 0
    n[flip] *= -1.0
    n[~ok] = 0.0
    return n, ok


def build_geometry(depth: np.ndarray, intr: CameraIntrinsics,
                   normals: np.ndarray | None = None,
                   valid: np.ndarray | None = None) -> GeometryBuffers:
    """Assemble geometry buffers from depth, intrinsics, and optional normals.

    When no normal map is supplied, normals are derived from the depth
    gradient (see :func:`normals_from_depth`).
    """
    depth = np.asarray(depth, dtype=np.float64)
    if valid is None:
        valid = np.isfinite(depth) & (depth > 0)
    points = backproject(depth, intr, valid)
    if normals is None:
        normals, valid = normals_from_depth(depth, intr, valid)
    else:
        normals = np.asarray(normals, dtype=np.float64)
        if normals.shape != points.shape:
            raise ValueError(f"normals shape {normals.shape} does not match "
                             f"depth {depth.shape}")
        norm = np.linalg.norm(normals, axis=-1)
        nz = norm > 1e-15
        valid = valid & nz
        normals = np.divide(normals, norm[..., None],
                            out=np.zeros_like(normals), where=nz[..., None])
    return GeometryBuffers(depth=depth, points=points, normals=normals,
                           valid=valid, intrinsics=intr)


def direction_field(geom: GeometryBuffers, light_pos: np.ndarray,
                    view_convention: str = "toward_camera") -> DirectionField:
    """Per-pixel unit view, light, and half vectors for a point light.

    l = (L - X)/|L - X|. The view direction is v = -X/|X| under the
    default ``toward_camera`` convention (surface-to-camera, the direction
    half-vector shading expects) or v = X/|X| under ``camera_to_point``.
    Pixels where the light coincides with the surface point, or where
    l + v nearly cancels, are marked invalid.
    """
    if view_convention == "toward_camera":
        sign = -1.0
    elif view_convention == "camera_to_point":
        sign = 1.0
    else:
        raise ValueError(f"unknown view convention: {view_convention!r}")
    light_pos = np.asarray(light_pos, dtype=np.float64).reshape(3)
    if not np.isfinite(light_pos).all():
        raise ValueError("light position must be finite")

    X = geom.points
    xn = np.linalg.norm(X, axis=-1)
    valid = geom.valid & (xn > 0)
    view = sign * np.divide(X, xn[..., None], out=np.zeros_like(X),
                            where=valid[..., None])

    d = light_pos[None, None, :] - X
    dn = np.linalg.norm(d, axis=-1)
    valid = valid & (dn > 0)
    light = np.divide(d, dn[..., None], out=np.zeros_like(d),
                      where=valid[..., None])

    hsum = light + view
    hn = np.linalg.norm(hsum, axis=-1)
    valid = valid & (hn >= _HALF_VECTOR_EPS)
    half = np.divide(hsum, hn[..., None], out=np.zeros_like(hsum),
                     where=valid[..., None])

    for field in (view, light, half):
        field[~valid] = 0.0
    return DirectionField(view=view, light=light, half=half, valid=valid)
