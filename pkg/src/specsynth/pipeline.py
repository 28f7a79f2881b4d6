"""End-to-end synthesis: geometry -> shading -> compositing -> masks.

``run_dataset`` drives batches deterministically: the RNG draw for sample
(image i, draw j) is keyed by the global counter i * draws_per_image + j,
so any worker count and scheduling order produce byte-identical artifacts.
Wall-clock data never enters the manifest; timing goes to a sidecar log.
"""

from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from time import perf_counter

import numpy as np

from . import __version__
from .compositing import (MaskSet, SynthesisPair, build_masks, composite,
                          detect_dataset_highlights)
from .config import ToolConfig
from .geometry import CameraIntrinsics, GeometryBuffers, build_geometry
from .image import linear_to_srgb, srgb_to_linear
from .io import read_pfm, read_png, read_tensor, write_mask_png, write_png, write_tensor
from .kernels import render_highlight
from .shading import ShadingParams, SamplingRanges, sample_params

__all__ = [
    "InputRecord",
    "SynthesisJob",
    "load_job",
    "load_input",
    "synthesize_one",
    "run_dataset",
]


@dataclass(frozen=True)
class InputRecord:
    """One source image with its geometry files."""

    input_id: str
    rgb: str
    depth: str
    intrinsics: CameraIntrinsics
    normals: str | None = None

    @classmethod
    def from_dict(cls, d: dict, base: Path) -> "InputRecord":
        def resolve(p):
            return str((base / p)) if p and not Path(p).is_absolute() else p
        return cls(
            input_id=str(d["id"]),
            rgb=resolve(d["rgb"]),
            depth=resolve(d["depth"]),
            intrinsics=CameraIntrinsics.from_dict(d["intrinsics"]),
            normals=resolve(d.get("normals")),
        )


@dataclass
class SynthesisJob:
    """A batch-synthesis request: inputs, sampling, thresholds, output dir."""

    inputs: list[InputRecord]
    output_dir: str
    draws_per_image: int = 1
    seed: int = 0
    ranges: SamplingRanges = field(default_factory=SamplingRanges)
    r0: float = 0.04
    tau_l: float = 0.95
    luma: str = "mean"
    pixel_thresh: float = 0.05
    patch_thresh: float = 0.10
    patch_size: int = 16
    view_convention: str = "toward_camera"

    def __post_init__(self):
        if self.draws_per_image < 1:
            raise ValueError("draws_per_image must be >= 1")
        if not self.inputs:
            raise ValueError("job has no inputs")
        ids = [rec.input_id for rec in self.inputs]
        if len(set(ids)) != len(ids):
            raise ValueError("input ids must be unique")
        # the per-draw RNG is keyed by (job seed, global counter)
        self.ranges = SamplingRanges(
            k_h_range=self.ranges.k_h_range, s_range=self.ranges.s_range,
            light_box=self.ranges.light_box, seed=self.seed)

    def config_snapshot(self) -> dict:
        return {
            "draws_per_image": self.draws_per_image,
            "seed": self.seed,
            "ranges": self.ranges.to_dict(),
            "r0": self.r0,
            "tau_l": self.tau_l,
            "luma": self.luma,
            "pixel_thresh": self.pixel_thresh,
            "patch_thresh": self.patch_thresh,
            "patch_size": self.patch_size,
            "view_convention": self.view_convention,
        }


def load_job(path: str | Path, seed: int | None = None,
             config: ToolConfig | None = None) -> SynthesisJob:
    """Build a job from its JSON description, resolving relative paths.

    CLI ``--seed`` (the ``seed`` argument) overrides the file; config
    defaults fill fields the file omits.
    """
    path = Path(path)
    with open(path) as f:
        d = json.load(f)
    base = path.parent
    cfg = config or ToolConfig()

    default_intr = d.get("intrinsics")
    inputs = []
    for rec in d["inputs"]:
        if "intrinsics" not in rec:
            if default_intr is None and cfg.intrinsics is None:
                raise ValueError(f"input {rec.get('id')}: no intrinsics given")
            rec = {**rec, "intrinsics": default_intr or cfg.intrinsics.to_dict()}
        inputs.append(InputRecord.from_dict(rec, base))

    out_dir = d["output_dir"]
    if not Path(out_dir).is_absolute():
        out_dir = str(base / out_dir)

    ranges = SamplingRanges.from_dict(d["ranges"]) if "ranges" in d else cfg.ranges
    job_seed = seed if seed is not None else int(d.get("seed", ranges.seed))
    return SynthesisJob(
        inputs=inputs,
        output_dir=out_dir,
        draws_per_image=int(d.get("draws_per_image", 1)),
        seed=job_seed,
        ranges=ranges,
        r0=float(d.get("r0", cfg.r0)),
        tau_l=float(d.get("tau_l", cfg.tau_l)),
        luma=str(d.get("luma", cfg.luma)),
        pixel_thresh=float(d.get("pixel_thresh", cfg.pixel_thresh)),
        patch_thresh=float(d.get("patch_thresh", cfg.patch_thresh)),
        patch_size=int(d.get("patch_size", cfg.patch_size)),
        view_convention=str(d.get("view_convention", cfg.view_convention)),
    )


def load_input(rec: InputRecord) -> tuple[np.ndarray, GeometryBuffers]:
    """Read one input's RGB (to linear float32) and geometry buffers."""
    rgb = srgb_to_linear(read_png(rec.rgb))
    depth = read_pfm(rec.depth)
    if depth.shape != rgb.shape[:2]:
        raise ValueError(f"{rec.input_id}: depth {depth.shape} does not match "
                         f"rgb {rgb.shape[:2]}")
    normals = None
    if rec.normals:
        normals = read_tensor(rec.normals)
        if normals.shape != rgb.shape[:2] + (3,):
            raise ValueError(f"{rec.input_id}: normals {normals.shape} do not "
                             f"match rgb {rgb.shape[:2]}")
    geom = build_geometry(depth, rec.intrinsics, normals=normals)
    return rgb, geom


def synthesize_one(rgb: np.ndarray, geom: GeometryBuffers,
                   params: ShadingParams, tau_l: float = 0.95,
                   luma: str = "mean", pixel_thresh: float = 0.05,
                   patch_size: int = 16, patch_thresh: float = 0.10,
                   view_convention: str = "toward_camera") -> SynthesisPair:
    """Render one highlight draw onto an image and build its mask set.

    Dataset highlights are detected on the clean input (synthetic ones are
    known exactly from the rendered map, so only pre-existing saturation
    needs thresholding).
    """
    if rgb.shape[:2] != geom.shape:
        raise ValueError(f"image {rgb.shape[:2]} does not match geometry {geom.shape}")
    if not geom.valid.any():
        raise ValueError("geometry has no valid pixels")
    hmap = render_highlight(geom.points, geom.normals, geom.valid,
                            np.array(params.light, dtype=np.float64),
                            params.r0, params.k_h, params.shininess,
                            view_convention)
    highlighted = composite(rgb, hmap, params.k_h)
    dataset_hl = detect_dataset_highlights(rgb, tau_l, luma)
    masks = build_masks(hmap, dataset_hl, pixel_thresh, patch_size, patch_thresh)
    return SynthesisPair(clean=rgb, highlighted=highlighted, highlight=hmap,
                         masks=masks, params=params)


def _mask_stats(masks: MaskSet) -> dict:
    return {
        "dataset_hl_pixels": int(masks.dataset_hl.sum()),
        "synthetic_hl_pixels": int(masks.synthetic_hl.sum()),
        "hole_pixels": int(masks.m_hole.sum()),
        "sup_pixels": int(masks.m_sup.sum()),
        "hole_patches": int(masks.patch_hole.sum()),
        "sup_patches": int(masks.patch_sup.sum()),
        "train_patches": int(masks.patch_train.sum()),
    }


def _synthesize_image(job: SynthesisJob, image_index: int) -> list[dict]:
    """All draws for one input image; returns manifest records."""
    rec = job.inputs[image_index]
    out_dir = Path(job.output_dir)
    records = []
    rgb, geom = load_input(rec)
    for draw in range(job.draws_per_image):
        counter = image_index * job.draws_per_image + draw
        params = sample_params(job.ranges, counter, job.r0)
        pair = synthesize_one(
            rgb, geom, params, tau_l=job.tau_l, luma=job.luma,
            pixel_thresh=job.pixel_thresh, patch_size=job.patch_size,
            patch_thresh=job.patch_thresh,
            view_convention=job.view_convention)
        stem = f"{rec.input_id}_d{draw:03d}"
        files = {
            "highlighted": f"{stem}_highlighted.png",
            "highlight": f"{stem}_highlight.urtd",
            "dataset_hl": f"{stem}_dataset_hl.png",
            "m_sup": f"{stem}_m_sup.png",
            "m_hole": f"{stem}_m_hole.png",
            "patch_train": f"{stem}_patch_train.urtd",
            "patch_hole": f"{stem}_patch_hole.urtd",
            "patch_sup": f"{stem}_patch_sup.urtd",
        }
        write_png(out_dir / files["highlighted"], linear_to_srgb(pair.highlighted))
        write_tensor(out_dir / files["highlight"], pair.highlight)
        write_mask_png(out_dir / files["dataset_hl"], pair.masks.dataset_hl)
        write_mask_png(out_dir / files["m_sup"], pair.masks.m_sup)
        write_mask_png(out_dir / files["m_hole"], pair.masks.m_hole)
        for key in ("patch_train", "patch_hole", "patch_sup"):
            write_tensor(out_dir / files[key],
                         getattr(pair.masks, key).astype(np.float32))
        records.append({
            "input_id": rec.input_id,
            "input_rgb": rec.rgb,
            "image_index": image_index,
            "draw_index": draw,
            "global_draw": counter,
            "params": params.to_dict(),
            "files": files,
            "stats": _mask_stats(pair.masks),
        })
    return records


def run_dataset(job: SynthesisJob, workers: int = 1) -> dict:
    """Synthesize every (image, draw) pair and write the manifest.

    Per-image failures are recorded in the manifest's ``errors`` list; the
    caller decides the exit status. Returns the manifest dict (also
    written to ``manifest.json`` in the output directory).
    """
    out_dir = Path(job.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    t0 = perf_counter()

    records: list[dict] = []
    errors: list[dict] = []
    indices = range(len(job.inputs))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = {idx: pool.submit(_synthesize_image, job, idx)
                       for idx in indices}
            for idx in indices:
                try:
                    records.extend(futures[idx].result())
                except Exception as exc:  # noqa: BLE001 - recorded, not silenced
                    errors.append({"input_id": job.inputs[idx].input_id,
                                   "error": str(exc)})
    else:
        for idx in indices:
            try:
                records.extend(_synthesize_image(job, idx))
            except Exception as exc:  # noqa: BLE001
                errors.append({"input_id": job.inputs[idx].input_id,
                               "error": str(exc)})

    records.sort(key=lambda r: (r["image_index"], r["draw_index"]))
    manifest = {
        "tool": "specsynth",
        "version": __version__,
        "config": job.config_snapshot(),
        "samples": records,
        "errors": sorted(errors, key=lambda e: e["input_id"]),
    }
    with open(out_dir / "manifest.json", "w") as f:
        json.dump(manifest, f, indent=2, sort_keys=True)
        f.write("\n")
    # timing stays out of the deterministic artifact set
    with open(out_dir / "timing.log", "w") as f:
        f.write(f"samples={len(records)} workers={workers} "
                f"elapsed_s={perf_counter() - t0:.3f}\n")
    return manifest
