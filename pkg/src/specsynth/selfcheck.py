"""End-user build validation: oracles, gradient checks, determinism.

Run via the ``selfcheck`` CLI command. Emits a JSON summary with one
pass/fail entry per check; the process exit code reflects overall success.
"""

from __future__ import annotations

import numpy as np

from . import kernels, losses
from .compositing import build_masks, composite
from .geometry import CameraIntrinsics
from .inpaint import (InpainterConfig, TokenGrid, init_weights, inpainting_loss,
                      local_mean_prior, positional_encoding, build_seed,
                      vit_forward, merge_completed)
from .shading import SamplingRanges, ShadingParams, fresnel_schlick, sample_params
from .testkit import PlaneScene, SphereScene, brute_force_highlight

__all__ = ["run_selfcheck"]

ORACLE_TOL = 1e-6
FD_TOL = 1e-4


def _random_scene(rng: np.random.Generator, intr: CameraIntrinsics,
                  size: int):
    if rng.uniform() < 0.5:
        center = (rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2),
                  rng.uniform(1.0, 3.0))
        radius = rng.uniform(0.3, 0.8) * center[2] / 2.0
        return SphereScene(center=center, radius=radius, intrinsics=intr,
                           width=size, height=size)
    tilt = rng.uniform(-0.5, 0.5, size=2)
    normal = (tilt[0], tilt[1], -1.0)
    return PlaneScene(normal=normal, offset=-rng.uniform(1.0, 3.0),
                      intrinsics=intr, width=size, height=size)


def _random_params(rng: np.random.Generator) -> ShadingParams:
    return ShadingParams(
        r0=0.04,
        k_h=rng.uniform(0.2, 1.0),
        shininess=rng.uniform(20.0, 400.0),
        light=(rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5),
               rng.uniform(0.0, 0.3)),
    )


def check_oracle_agreement(trials: int = 1000, seed: int = 0) -> dict:
    """Renderer vs scalar oracle on random (scene, params, pixel) triples."""
    rng = np.random.default_rng(seed)
    size = 48
    intr = CameraIntrinsics(fx=60.0, fy=60.0, cx=size / 2, cy=size / 2)
    worst = 0.0
    done = 0
    scene = None
    rendered = None
    params = None
    while done < trials:
        if done % 50 == 0:
            scene = _random_scene(rng, intr, size)
            params = _random_params(rng)
            geom = scene.raster()
            rendered = kernels.render_highlight(
                geom.points, geom.normals, geom.valid,
                np.array(params.light), params.r0, params.k_h,
                params.shininess)
            covered = np.argwhere(geom.valid)
            if covered.size == 0:
                continue
        vy, ux = covered[rng.integers(len(covered))]
        expected = brute_force_highlight(scene, params, (int(ux), int(vy)))
        worst = max(worst, abs(float(rendered[vy, ux]) - expected))
        done += 1
    return {"name": "oracle_agreement", "max_abs_error": float(worst),
            "trials": trials, "passed": bool(worst < ORACLE_TOL)}


def check_fresnel_fixed_points() -> dict:
    at_normal = fresnel_schlick(1.0, 0.04)
    at_grazing = [fresnel_schlick(0.0, r0) for r0 in (0.0, 0.04, 0.5, 1.0)]
    ulp = float(np.spacing(np.float32(1.0)))
    ok = at_normal == 0.04 and all(abs(g - 1.0) <= ulp for g in at_grazing)
    return {"name": "fresnel_fixed_points", "passed": bool(ok),
            "at_normal_incidence": float(at_normal)}


def check_loss_gradients(seed: int = 0) -> dict:
    rng = np.random.default_rng(seed)
    results = {}

    p = rng.uniform(0.05, 0.95, (6, 6))
    t = rng.uniform(0.05, 0.95, (6, 6))
    results["highlight"] = losses.fd_check(
        lambda x: _pair(losses.highlight_loss(x, t)), p)

    img = rng.uniform(0.1, 0.9, (8, 8, 3))
    pred = img + rng.normal(0, 0.05, img.shape)
    hole = np.zeros((8, 8), dtype=bool)
    hole[3:5, 3:5] = True
    ring = losses.seam_ring(hole, 1)
    results["seam"] = losses.fd_check(
        lambda x: _pair(losses.seam_loss(x, img, ring, 1.0)), pred)

    bright = rng.uniform(0.7, 1.0, (6, 6, 3))
    b = bright.mean(axis=-1)
    bright[np.abs(b - 0.85) < 1e-3] += 0.01  # keep off the threshold
    results["spec_penalty"] = losses.fd_check(
        lambda x: _pair(losses.spec_penalty(x)), bright)

    a = rng.uniform(-1, 1, (3, 3, 8))
    tgt = rng.uniform(-1, 1, (3, 3, 8))
    train = rng.uniform(size=(3, 3)) < 0.6
    results["inpainting"] = losses.fd_check(
        lambda x: inpainting_loss(x, tgt, train, 0.25), a)

    worst = max(results.values())
    return {"name": "loss_gradients", "max_rel_error": float(worst),
            "per_loss": {k: float(v) for k, v in results.items()},
            "passed": bool(worst < FD_TOL)}


def _pair(report: losses.LossReport):
    return report.total, report.gradient


def check_determinism(seed: int = 0) -> dict:
    rng = np.random.default_rng(seed)
    intr = CameraIntrinsics(fx=40.0, fy=40.0, cx=16.0, cy=16.0)
    scene = SphereScene(center=(0.0, 0.0, 2.0), radius=0.7,
                        intrinsics=intr, width=32, height=32)
    geom = scene.raster()
    light = np.array([0.1, -0.1, 0.2])
    h1 = kernels.render_highlight(geom.points, geom.normals, geom.valid,
                                  light, 0.04, 0.8, 90.0)
    h2 = kernels.render_highlight(geom.points, geom.normals, geom.valid,
                                  light, 0.04, 0.8, 90.0)
    render_ok = np.array_equal(h1, h2)

    ranges = SamplingRanges(seed=123)
    sample_ok = sample_params(ranges, 5) == sample_params(ranges, 5)

    cfg = InpainterConfig(dim=16, depth=2, heads=2, seed=seed)
    grid = TokenGrid(tokens=rng.normal(size=(4, 4, 16)),
                     mask=rng.uniform(size=(4, 4)) < 0.4)
    w = init_weights(cfg)
    seed_field = build_seed(grid, local_mean_prior(grid, 3),
                            positional_encoding(4, 4, 16), w.mask_token, cfg.lam)
    vit_ok = np.array_equal(vit_forward(seed_field, w),
                            vit_forward(seed_field, w))
    ok = render_ok and sample_ok and vit_ok
    return {"name": "determinism", "passed": bool(ok),
            "render": bool(render_ok), "sampling": bool(sample_ok),
            "transformer": bool(vit_ok)}


def check_mask_algebra(seed: int = 0) -> dict:
    rng = np.random.default_rng(seed)
    violations = 0
    for _ in range(20):
        h = rng.uniform(0, 1, (24, 24)).astype(np.float32) ** 3
        ds = rng.uniform(size=(24, 24)) < 0.05
        ms = build_masks(h, ds, 0.05, 8, 0.10)
        if not np.array_equal(ms.m_sup, ~ms.dataset_hl):
            violations += 1
        if (ms.dataset_hl & ~ms.m_hole).any():
            violations += 1
        if not np.array_equal(ms.patch_train, ms.patch_hole & ms.patch_sup):
            violations += 1
    return {"name": "mask_algebra", "violations": violations,
            "passed": violations == 0}


def check_token_passthrough(seed: int = 0) -> dict:
    rng = np.random.default_rng(seed)
    cfg = InpainterConfig(dim=16, depth=2, heads=2, seed=seed)
    grid = TokenGrid(tokens=rng.normal(size=(5, 4, 16)),
                     mask=rng.uniform(size=(5, 4)) < 0.5)
    refined = rng.normal(size=(5, 4, 16))
    comp = merge_completed(grid, refined)
    vis = ~grid.mask
    ok = np.array_equal(comp[vis], grid.tokens[vis])
    return {"name": "token_passthrough", "passed": bool(ok)}


def check_composite_identity(seed: int = 0) -> dict:
    rng = np.random.default_rng(seed)
    img = rng.uniform(0, 1, (16, 16, 3)).astype(np.float32)
    zero = np.zeros((16, 16), dtype=np.float32)
    ok = np.array_equal(composite(img, zero, 0.7), img)
    return {"name": "composite_identity", "passed": bool(ok)}


def run_selfcheck(seed: int = 0, oracle_trials: int = 1000) -> dict:
    """Run every check; ``passed`` is the conjunction."""
    checks = [
        check_fresnel_fixed_points(),
        check_oracle_agreement(trials=oracle_trials, seed=seed),
        check_loss_gradients(seed=seed),
        check_determinism(seed=seed),
        check_mask_algebra(seed=seed),
        check_token_passthrough(seed=seed),
        check_composite_identity(seed=seed),
    ]
    return {"backend": kernels.BACKEND,
            "passed": all(c["passed"] for c in checks),
            "checks": checks}
