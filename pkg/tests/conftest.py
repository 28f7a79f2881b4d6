"""Shared fixtures: deterministic synthetic inputs for pipeline tests."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import pytest

from specsynth.geometry import CameraIntrinsics
from specsynth.io import write_pfm, write_png


def make_rgb(size: int, index: int = 0, bright_disc: bool = True) -> np.ndarray:
    """A smooth uint8 test image, optionally with a saturated disc.

    The gradient background stays below the default luminance cutoff; the
    disc sits above it so dataset-highlight detection has work to do.
    """
    yy, xx = np.meshgrid(np.linspace(0, 1, size), np.linspace(0, 1, size),
                         indexing="ij")
    r = 0.15 + 0.5 * xx
    g = 0.20 + 0.4 * yy
    b = 0.25 + 0.3 * (xx + yy) / 2 + 0.05 * np.sin(7 * xx + index)
    img = np.stack([r, g, b], axis=-1)
    if bright_disc:
        cy, cx = size * 0.3, size * 0.7
        rad = max(2.0, size * 0.06)
        disc = (yy * size - cy) ** 2 + (xx * size - cx) ** 2 < rad ** 2
        img[disc] = 0.99
    return np.rint(np.clip(img, 0, 1) * 255).astype(np.uint8)


def make_depth(size: int, index: int = 0) -> np.ndarray:
    """Smooth positive depth: a 2 m plane with gentle ripples."""
    yy, xx = np.meshgrid(np.linspace(0, 1, size), np.linspace(0, 1, size),
                         indexing="ij")
    return (2.0 + 0.15 * np.sin(3 * xx + index) + 0.1 * np.cos(4 * yy)
            ).astype(np.float32)


def default_intrinsics(size: int) -> CameraIntrinsics:
    return CameraIntrinsics(fx=1.2 * size, fy=1.2 * size,
                            cx=(size - 1) / 2.0, cy=(size - 1) / 2.0)


def write_job_inputs(root: Path, n_images: int, size: int) -> list[dict]:
    """Write PNG+PFM inputs under root/inputs and return job input records."""
    in_dir = root / "inputs"
    in_dir.mkdir(parents=True, exist_ok=True)
    intr = default_intrinsics(size)
    records = []
    for i in range(n_images):
        rgb_path = in_dir / f"img{i:03d}.png"
        depth_path = in_dir / f"img{i:03d}.pfm"
        write_png(rgb_path, make_rgb(size, i))
        write_pfm(depth_path, make_depth(size, i))
        records.append({
            "id": f"img{i:03d}",
            "rgb": str(rgb_path),
            "depth": str(depth_path),
            "intrinsics": intr.to_dict(),
        })
    return records


def write_job_file(root: Path, n_images: int, draws: int, size: int,
                   seed: int = 7, out_name: str = "out", **overrides) -> Path:
    """Write a complete job JSON and return its path."""
    job = {
        "inputs": write_job_inputs(root, n_images, size),
        "output_dir": str(root / out_name),
        "draws_per_image": draws,
        "seed": seed,
    }
    job.update(overrides)
    path = root / "job.json"
    with open(path, "w") as f:
        json.dump(job, f, indent=2)
    return path


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)


def margin_uniform(rng, shape, margin=1.5e-3, lo=0.0, hi=1.0):
    """Uniform draw resampled until neighbor differences clear the margin.

    Keeps L1/TV kinks (where a central difference would straddle the
    non-smooth point) away from gradient checks.
    """
    for _ in range(200):
        x = rng.uniform(lo, hi, shape)
        ok = True
        for axis in (0, 1):
            d = np.abs(np.diff(x, axis=axis))
            if d.size and d.min() <= margin:
                ok = False
                break
        if ok:
            return x
    raise RuntimeError("could not draw a margin-respecting instance")


def offset_from(rng, base, margin=1.5e-3, scale=0.2):
    """base + noise whose magnitude stays above the kink margin everywhere."""
    mag = rng.uniform(margin * 4, scale, base.shape)
    sign = rng.choice([-1.0, 1.0], base.shape)
    return base + mag * sign


def kink_free_delta(rng, shape, margin=1.2e-3, scale=0.3):
    """A perturbation whose values AND neighbor differences clear the margin.

    Needed for losses with kinks both at zero residual and at zero residual
    gradient (the seam loss).
    """
    for _ in range(500):
        d = rng.uniform(-scale, scale, shape)
        if np.abs(d).min() <= margin:
            continue
        ok = True
        for axis in (0, 1):
            dd = np.abs(np.diff(d, axis=axis))
            if dd.size and dd.min() <= margin:
                ok = False
                break
        if ok:
            return d
    raise RuntimeError("could not draw a kink-free perturbation")


def independent_pair(rng, shape, margin=1.5e-3):
    """Two margin-respecting fields that also stay apart pointwise."""
    for _ in range(200):
        t = margin_uniform(rng, shape, margin)
        p = margin_uniform(rng, shape, margin)
        if np.abs(p - t).min() > margin:
            return t, p
    raise RuntimeError("could not draw an instance pair")
