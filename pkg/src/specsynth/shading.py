"""Specular shading: Schlick Fresnel, the Blinn-Phong lobe, and parameter sampling.

Lighting parameters are drawn with a counter-based RNG (Philox keyed by
(seed, draw_index)), so every sample of a dataset is reproducible on its
own, independent of scheduling order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import DirectionField

__all__ = [
    "ShadingParams",
    "SamplingRanges",
    "fresnel_schlick",
    "blinn_phong_highlight",
    "sample_params",
]

DEFAULT_R0 = 0.04

# Library defaults for the sampling distributions; tuned for meter-scale
# scenes, configurable per job.
DEFAULT_K_H_RANGE = (0.2, 1.0)
DEFAULT_S_RANGE = (20.0, 400.0)
DEFAULT_LIGHT_BOX = ((-0.5, 0.5), (-0.5, 0.5), (0.0, 0.3))


@dataclass(frozen=True)
class ShadingParams:
    """One draw of the specular lobe parameters."""

    r0: float                 # Fresnel reflectance at normal incidence
    k_h: float                # global highlight intensity, > 0
    shininess: float          # Blinn-Phong exponent, > 0
    light: tuple[float, float, float]  # point light position, camera frame (m)

    def __post_init__(self):
        if not 0.0 <= self.r0 <= 1.0:
            raise ValueError(f"r0 must be in [0, 1], got {self.r0}")
        if self.k_h <= 0:
            raise ValueError(f"k_h must be positive, got {self.k_h}")
        if self.shininess <= 0:
            raise ValueError(f"shininess must be positive, got {self.shininess}")

    def to_dict(self) -> dict:
        return {"r0": self.r0, "k_h": self.k_h, "shininess": self.shininess,
                "light": list(self.light)}

    @classmethod
    def from_dict(cls, d: dict) -> "ShadingParams":
        return cls(r0=float(d["r0"]), k_h=float(d["k_h"]),
                   shininess=float(d["shininess"]),
                   light=tuple(float(x) for x in d["light"]))


@dataclass(frozen=True)
class SamplingRanges:
    """Uniform sampling ranges for lobe parameters and light placement."""

    k_h_range: tuple[float, float] = DEFAULT_K_H_RANGE
    s_range: tuple[float, float] = DEFAULT_S_RANGE
    light_box: tuple[tuple[float, float], ...] = DEFAULT_LIGHT_BOX
    seed: int = 0

    def __post_init__(self):
        for lo, hi in (self.k_h_range, self.s_range, *self.light_box):
            if lo > hi:
                raise ValueError(f"range lower bound {lo} exceeds upper {hi}")
        if len(self.light_box) != 3:
            raise ValueError("light_box needs one (lo, hi) pair per axis")

    def to_dict(self) -> dict:
        return {"k_h_range": list(self.k_h_range), "s_range": list(self.s_range),
                "light_box": [list(ax) for ax in self.light_box], "seed": self.seed}

    @classmethod
    def from_dict(cls, d: dict) -> "SamplingRanges":
        return cls(
            k_h_range=tuple(d.get("k_h_range", DEFAULT_K_H_RANGE)),
            s_range=tuple(d.get("s_range", DEFAULT_S_RANGE)),
            light_box=tuple(tuple(ax) for ax in d.get("light_box", DEFAULT_LIGHT_BOX)),
            seed=int(d.get("seed", 0)),
        )


def fresnel_schlick(cos_vh, r0):
    """Schlick approximation R = r0 + (1 - r0)(1 - cos)^5, scalar or array.

    The caller clamps cos_vh to [0, 1]; within that range the result is a
    monotonically decreasing function of cos_vh bounded in [r0, 1].
    """
    return r0 + (1.0 - r0) * (1.0 - cos_vh) ** 5


def blinn_phong_highlight(dirs: DirectionField, normals: np.ndarray,
                          params: ShadingParams) -> np.ndarray:
    """Per-pixel highlight intensity H = k_h * R * max(0, n.h)^S, in [0, 1].

    R is the Schlick Fresnel coefficient at max(0, v.h). Both dot products
    are clamped at zero so back-facing geometry contributes nothing; the
    result is clamped to [0, 1] and zeroed on invalid pixels. float32 out.
    """
    normals = np.asarray(normals, dtype=np.float64)
    nh = np.maximum((normals * dirs.half).sum(axis=-1), 0.0)
    vh = np.clip((dirs.view * dirs.half).sum(axis=-1), 0.0, 1.0)
    fresnel = fresnel_schlick(vh, params.r0)
    out = np.clip(params.k_h * fresnel * nh ** params.shininess, 0.0, 1.0)
    out[~dirs.valid] = 0.0
    return out.astype(np.float32)


def _uniform(rng: np.random.Generator, lo: float, hi: float) -> float:
    return float(lo) if lo == hi else float(rng.uniform(lo, hi))


def sample_params(ranges: SamplingRanges, draw_index: int,
                  r0: float = DEFAULT_R0) -> ShadingParams:
    """Draw lobe parameters for one sample, deterministic in (seed, draw_index).

    Draw order is fixed (k_h, shininess, light x/y/z) so recorded datasets
    can be regenerated bit-for-bit. r0 is not sampled; it comes from config.
    """
    if draw_index < 0:
        raise ValueError("draw_index must be non-negative")
    key = np.array([ranges.seed & 0xFFFFFFFFFFFFFFFF, draw_index],
                   dtype=np.uint64)
    rng = np.random.Generator(np.random.Philox(key=key))
    k_h = _uniform(rng, *ranges.k_h_range)
    shininess = _uniform(rng, *ranges.s_range)
    light = tuple(_uniform(rng, lo, hi) for lo, hi in ranges.light_box)
    return ShadingParams(r0=r0, k_h=k_h, shininess=shininess, light=light)
