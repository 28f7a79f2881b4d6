"""Tool configuration: one JSON file covering shading, thresholds, the
inpainter, and loss weights.

Every field has a library default; a config file only needs the keys it
overrides. Schema (all keys optional):

{
  "r0": 0.04,
  "ranges": {"k_h_range": [0.2, 1.0], "s_range": [20, 400],
             "light_box": [[-0.5, 0.5], [-0.5, 0.5], [0.0, 0.3]], "seed": 0},
  "tau_l": 0.95,
  "luma": "mean",                 # or "rec709"
  "pixel_thresh": 0.05,
  "patch_thresh": 0.10,
  "patch_size": 16,
  "view_convention": "toward_camera",   # or "camera_to_point"
  "intrinsics": {"fx": ..., "fy": ..., "cx": ..., "cy": ...},
  "inpainter": {"dim": 64, "depth": 6, "heads": 4,
                "neighborhood": 3, "lambda": 0.5, "alpha": 0.25, "seed": 0},
  "loss_weights": {"w_dice": 0.2, "w_l1": 0.7, "w_tv": 0.1, "w_seam": 0.25,
                   "w_spec": 0.25, "w_rgb": 0.5, "lambda_g": 1.0,
                   "tau_m": 0.85, "eps": 1e-6, "dice_smooth": 1.0}
}
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .compositing import (DEFAULT_PATCH_SIZE, DEFAULT_PATCH_THRESH,
                          DEFAULT_PIXEL_THRESH, DEFAULT_TAU_L)
from .geometry import CameraIntrinsics
from .inpaint import InpainterConfig
from .losses import LossWeights
from .shading import DEFAULT_R0, SamplingRanges

__all__ = ["ToolConfig", "load_config"]

DEFAULT_INPAINT_ALPHA = 0.25


@dataclass
class ToolConfig:
    r0: float = DEFAULT_R0
    ranges: SamplingRanges = field(default_factory=SamplingRanges)
    tau_l: float = DEFAULT_TAU_L
    luma: str = "mean"
    pixel_thresh: float = DEFAULT_PIXEL_THRESH
    patch_thresh: float = DEFAULT_PATCH_THRESH
    patch_size: int = DEFAULT_PATCH_SIZE
    view_convention: str = "toward_camera"
    intrinsics: CameraIntrinsics | None = None
    inpainter: InpainterConfig = field(default_factory=InpainterConfig)
    inpaint_alpha: float = DEFAULT_INPAINT_ALPHA
    loss_weights: LossWeights = field(default_factory=LossWeights)

    @classmethod
    def from_dict(cls, d: dict) -> "ToolConfig":
        kwargs: dict = {}
        for key in ("r0", "tau_l", "pixel_thresh", "patch_thresh"):
            if key in d:
                kwargs[key] = float(d[key])
        for key in ("luma", "view_convention"):
            if key in d:
                kwargs[key] = str(d[key])
        if "patch_size" in d:
            kwargs["patch_size"] = int(d["patch_size"])
        if "ranges" in d:
            kwargs["ranges"] = SamplingRanges.from_dict(d["ranges"])
        if "intrinsics" in d:
            kwargs["intrinsics"] = CameraIntrinsics.from_dict(d["intrinsics"])
        if "inpainter" in d:
            ip = dict(d["inpainter"])
            alpha = ip.pop("alpha", None)
            if alpha is not None:
                kwargs["inpaint_alpha"] = float(alpha)
            if "lambda" in ip:
                ip["lam"] = ip.pop("lambda")
            kwargs["inpainter"] = InpainterConfig(**ip)
        if "loss_weights" in d:
            kwargs["loss_weights"] = LossWeights.from_dict(d["loss_weights"])
        return cls(**kwargs)

    def to_dict(self) -> dict:
        out = {
            "r0": self.r0,
            "ranges": self.ranges.to_dict(),
            "tau_l": self.tau_l,
            "luma": self.luma,
            "pixel_thresh": self.pixel_thresh,
            "patch_thresh": self.patch_thresh,
            "patch_size": self.patch_size,
            "view_convention": self.view_convention,
            "inpainter": {
                "dim": self.inpainter.dim, "depth": self.inpainter.depth,
                "heads": self.inpainter.heads,
                "neighborhood": self.inpainter.neighborhood,
                "lambda": self.inpainter.lam, "alpha": self.inpaint_alpha,
                "seed": self.inpainter.seed,
            },
            "loss_weights": {
                "w_dice": self.loss_weights.w_dice,
                "w_l1": self.loss_weights.w_l1,
                "w_tv": self.loss_weights.w_tv,
                "w_seam": self.loss_weights.w_seam,
                "w_spec": self.loss_weights.w_spec,
                "w_rgb": self.loss_weights.w_rgb,
                "lambda_g": self.loss_weights.lambda_g,
                "tau_m": self.loss_weights.tau_m,
                "eps": self.loss_weights.eps,
                "dice_smooth": self.loss_weights.dice_smooth,
            },
        }
        if self.intrinsics is not None:
            out["intrinsics"] = self.intrinsics.to_dict()
        return out


def load_config(path: str | Path | None) -> ToolConfig:
    """Load a config file, or the defaults when no path is given."""
    if path is None:
        return ToolConfig()
    with open(path) as f:
        return ToolConfig.from_dict(json.load(f))
