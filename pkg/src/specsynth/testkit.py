"""Analytic scenes and brute-force oracles for verification.

The oracles here are deliberately slow, scalar, straight-line Python using
the ``math`` module: they share no helpers with the production render path
so the two routes stay independent. Scenes carry closed-form depth and
normal evaluators plus their camera, so both the rasterizer and the oracle
consume identical geometry values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import CameraIntrinsics, GeometryBuffers, backproject
from .shading import ShadingParams

__all__ = [
    "PlaneScene",
    "SphereScene",
    "make_sphere_scene",
    "make_checkerboard",
    "brute_force_highlight",
]


@dataclass(frozen=True)
class PlaneScene:
    """An infinite plane n . X = offset, rasterized through a pinhole camera."""

    normal: tuple[float, float, float]
    offset: float
    intrinsics: CameraIntrinsics
    width: int
    height: int

    def depth_at(self, u: float, v: float) -> float | None:
        k = self.intrinsics
        wx = (u - k.cx) / k.fx
        wy = (v - k.cy) / k.fy
        denom = self.normal[0] * wx + self.normal[1] * wy + self.normal[2]
        if denom == 0.0:
            return None
        t = self.offset / denom
        return t if t > 0 else None

    def normal_at(self, u: float, v: float) -> tuple[float, float, float]:
        nx, ny, nz = self.normal
        norm = math.sqrt(nx * nx + ny * ny + nz * nz)
        n = (nx / norm, ny / norm, nz / norm)
        # orient toward the camera
        d = self.depth_at(u, v)
        if d is not None:
            k = self.intrinsics
            x = d * (u - k.cx) / k.fx
            y = d * (v - k.cy) / k.fy
            if n[0] * x + n[1] * y + n[2] * d > 0:
                n = (-n[0], -n[1], -n[2])
        return n

    def raster(self) -> GeometryBuffers:
        return _raster(self)


@dataclass(frozen=True)
class SphereScene:
    """A sphere in front of the camera, ray-cast through a pinhole."""

    center: tuple[float, float, float]
    radius: float
    intrinsics: CameraIntrinsics
    width: int
    height: int

    def __post_init__(self):
        if self.center[2] - self.radius <= 0:
            raise ValueError("sphere must lie fully in front of the camera")

    def depth_at(self, u: float, v: float) -> float | None:
        k = self.intrinsics
        wx = (u - k.cx) / k.fx
        wy = (v - k.cy) / k.fy
        cx, cy, cz = self.center
        a = wx * wx + wy * wy + 1.0
        b = -2.0 * (wx * cx + wy * cy + cz)
        c = cx * cx + cy * cy + cz * cz - self.radius * self.radius
        disc = b * b - 4.0 * a * c
        if disc < 0.0:
            return None
        t = (-b - math.sqrt(disc)) / (2.0 * a)
        return t if t > 0 else None

    def normal_at(self, u: float, v: float) -> tuple[float, float, float] | None:
        d = self.depth_at(u, v)
        if d is None:
            return None
        k = self.intrinsics
        x = d * (u - k.cx) / k.fx
        y = d * (v - k.cy) / k.fy
        cx, cy, cz = self.center
        return ((x - cx) / self.radius, (y - cy) / self.radius,
                (d - cz) / self.radius)

    def raster(self) -> GeometryBuffers:
        return _raster(self)


def _raster(scene) -> GeometryBuffers:
    """Rasterize a scene's closed-form depth and normals into buffers."""
    h, w = scene.height, scene.width
    depth = np.zeros((h, w), dtype=np.float64)
    normals = np.zeros((h, w, 3), dtype=np.float64)
    valid = np.zeros((h, w), dtype=bool)
    for v in range(h):
        for u in range(w):
            d = scene.depth_at(float(u), float(v))
            if d is None:
                continue
            depth[v, u] = d
            normals[v, u] = scene.normal_at(float(u), float(v))
            valid[v, u] = True
    points = backproject(depth, scene.intrinsics, valid)
    return GeometryBuffers(depth=depth, points=points, normals=normals,
                           valid=valid, intrinsics=scene.intrinsics)


def make_sphere_scene(radius: float, center: tuple[float, float, float],
                      intrinsics: CameraIntrinsics,
                      resolution: tuple[int, int]) -> SphereScene:
    """Convenience constructor; resolution is (height, width)."""
    return SphereScene(center=tuple(center), radius=radius,
                       intrinsics=intrinsics,
                       width=resolution[1], height=resolution[0])


def make_checkerboard(height: int, width: int, tile: int = 1,
                      lo: float = 0.0, hi: float = 1.0) -> np.ndarray:
    """An (H, W, 3) float32 checkerboard image, for metric tests."""
    yy, xx = np.meshgrid(np.arange(height) // tile, np.arange(width) // tile,
                         indexing="ij")
    pattern = ((yy + xx) % 2).astype(np.float32)
    img = lo + (hi - lo) * pattern
    return np.repeat(img[..., None], 3, axis=-1).astype(np.float32)


def brute_force_highlight(scene, params: ShadingParams,
                          pixel: tuple[int, int],
                          view_convention: str = "toward_camera") -> float:
    """Scalar re-derivation of the highlight intensity at one pixel.

    Straight-line math-module arithmetic; the oracle for the vectorized
    and compiled render kernels. ``pixel`` is (u, v) = (column, row); the
    pixel must be covered by the scene.
    """
    u, v = pixel
    k = scene.intrinsics
    d = scene.depth_at(float(u), float(v))
    if d is None:
        raise ValueError(f"pixel {pixel} not covered by the scene")
    n = scene.normal_at(float(u), float(v))

    # back-project
    px = d * (u - k.cx) / k.fx
    py = d * (v - k.cy) / k.fy
    pz = d

    # view direction
    xn = math.sqrt(px * px + py * py + pz * pz)
    sign = -1.0 if view_convention == "toward_camera" else 1.0
    vx = sign * px / xn
    vy = sign * py / xn
    vz = sign * pz / xn

    # light direction
    lx_, ly_, lz_ = params.light
    dx = lx_ - px
    dy = ly_ - py
    dz = lz_ - pz
    dn = math.sqrt(dx * dx + dy * dy + dz * dz)
    if dn == 0.0:
        return 0.0
    lx = dx / dn
    ly = dy / dn
    lz = dz / dn

    # half vector
    hx = lx + vx
    hy = ly + vy
    hz = lz + vz
    hn = math.sqrt(hx * hx + hy * hy + hz * hz)
    if hn < 1e-8:
        return 0.0
    hx /= hn
    hy /= hn
    hz /= hn

    nh = n[0] * hx + n[1] * hy + n[2] * hz
    if nh < 0.0:
        nh = 0.0
    vh = vx * hx + vy * hy + vz * hz
    if vh < 0.0:
        vh = 0.0
    if vh > 1.0:
        vh = 1.0

    fresnel = params.r0 + (1.0 - params.r0) * (1.0 - vh) ** 5
    value = params.k_h * fresnel * nh ** params.shininess
    return min(1.0, max(0.0, value))
