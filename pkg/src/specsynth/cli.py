"""Command-line interface.

Subcommands: render (one image, explicit lobe parameters), dataset (batch
via a job JSON), masks (mask construction only), inpaint-demo (token
inpainting chain), eval (metric reports), selfcheck (build validation).
Exit code 0 only on full success.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .compositing import build_masks, detect_dataset_highlights
from .config import ToolConfig, load_config
from .geometry import CameraIntrinsics
from .image import linear_to_srgb, srgb_to_linear
from .io import (read_mask_png, read_png, read_tensor, write_mask_png,
                 write_png, write_tensor)
from .inpaint import TokenGrid, init_weights, inpainting_loss, run_inpainter
from .metrics import LSR_DEFINITION, evaluate_pair
from .pipeline import InputRecord, load_input, load_job, run_dataset, synthesize_one
from .shading import ShadingParams


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, default=None,
                   help="JSON config file (defaults used when omitted)")
    p.add_argument("--seed", type=int, default=None, help="RNG seed override")
    p.add_argument("--workers", type=int, default=1,
                   help="parallel workers for batch commands")


def _intrinsics_from_args(args, cfg: ToolConfig) -> CameraIntrinsics:
    if args.fx is not None:
        missing = [n for n in ("fx", "fy", "cx", "cy") if getattr(args, n) is None]
        if missing:
            raise SystemExit(f"missing intrinsics flags: {missing}")
        return CameraIntrinsics(fx=args.fx, fy=args.fy, cx=args.cx, cy=args.cy)
    if cfg.intrinsics is None:
        raise SystemExit("no intrinsics: pass --fx/--fy/--cx/--cy or a config "
                         "with an 'intrinsics' section")
    return cfg.intrinsics


def _write_sample_outputs(out_dir: Path, pair, stem: str) -> dict:
    out_dir.mkdir(parents=True, exist_ok=True)
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
    return files


def cmd_render(args) -> int:
    cfg = load_config(args.config)
    intr = _intrinsics_from_args(args, cfg)
    rec = InputRecord(input_id=args.rgb.stem, rgb=str(args.rgb),
                      depth=str(args.depth), intrinsics=intr,
                      normals=str(args.normals) if args.normals else None)
    rgb, geom = load_input(rec)
    params = ShadingParams(r0=args.r0 if args.r0 is not None else cfg.r0,
                           k_h=args.kh, shininess=args.shininess,
                           light=tuple(args.light))
    pair = synthesize_one(rgb, geom, params, tau_l=cfg.tau_l, luma=cfg.luma,
                          pixel_thresh=cfg.pixel_thresh,
                          patch_size=cfg.patch_size,
                          patch_thresh=cfg.patch_thresh,
                          view_convention=cfg.view_convention)
    files = _write_sample_outputs(args.out, pair, rec.input_id)
    record = {"input_id": rec.input_id, "params": params.to_dict(),
              "files": files, "version": __version__}
    with open(args.out / f"{rec.input_id}_record.json", "w") as f:
        json.dump(record, f, indent=2, sort_keys=True)
        f.write("\n")
    print(f"rendered {rec.input_id} -> {args.out}")
    return 0


def cmd_dataset(args) -> int:
    cfg = load_config(args.config)
    job = load_job(args.job, seed=args.seed, config=cfg)
    manifest = run_dataset(job, workers=args.workers)
    n = len(manifest["samples"])
    errs = manifest["errors"]
    print(f"wrote {n} samples to {job.output_dir} "
          f"({len(errs)} errors)")
    for e in errs:
        print(f"  error [{e['input_id']}]: {e['error']}", file=sys.stderr)
    return 0 if not errs else 1


def cmd_masks(args) -> int:
    cfg = load_config(args.config)
    rgb = srgb_to_linear(read_png(args.rgb))
    if args.highlight is not None:
        hmap = read_tensor(args.highlight)
        if hmap.shape != rgb.shape[:2]:
            raise SystemExit(f"highlight map {hmap.shape} does not match "
                             f"image {rgb.shape[:2]}")
    else:
        hmap = np.zeros(rgb.shape[:2], dtype=np.float32)
    dataset_hl = detect_dataset_highlights(rgb, cfg.tau_l, cfg.luma)
    masks = build_masks(hmap, dataset_hl, cfg.pixel_thresh, cfg.patch_size,
                        cfg.patch_thresh)
    out: Path = args.out
    out.mkdir(parents=True, exist_ok=True)
    stem = args.rgb.stem
    write_mask_png(out / f"{stem}_dataset_hl.png", masks.dataset_hl)
    write_mask_png(out / f"{stem}_m_sup.png", masks.m_sup)
    write_mask_png(out / f"{stem}_m_hole.png", masks.m_hole)
    for key in ("patch_train", "patch_hole", "patch_sup"):
        write_tensor(out / f"{stem}_{key}.urtd",
                     getattr(masks, key).astype(np.float32))
    print(f"masks for {stem} -> {out}")
    return 0


def cmd_inpaint_demo(args) -> int:
    cfg = load_config(args.config)
    icfg = cfg.inpainter
    if args.seed is not None:
        icfg = type(icfg)(dim=icfg.dim, depth=icfg.depth, heads=icfg.heads,
                          neighborhood=icfg.neighborhood, lam=icfg.lam,
                          seed=args.seed)
    if args.tokens is not None:
        tokens = read_tensor(args.tokens).astype(np.float64)
        if args.mask is None:
            raise SystemExit("--mask is required when --tokens is given")
        mask = read_tensor(args.mask) > 0.5
    else:
        rng = np.random.default_rng(icfg.seed)
        tokens = rng.normal(size=(8, 8, icfg.dim))
        mask = rng.uniform(size=(8, 8)) < 0.3
    if tokens.shape[-1] != icfg.dim:
        raise SystemExit(f"token dim {tokens.shape[-1]} does not match "
                         f"configured dim {icfg.dim}")
    grid = TokenGrid(tokens=tokens, mask=mask)
    weights = init_weights(icfg)
    fields = run_inpainter(grid, icfg, weights)
    target = (read_tensor(args.target).astype(np.float64)
              if args.target is not None else grid.tokens)
    loss, _ = inpainting_loss(fields["f_comp"], target, grid.mask,
                              cfg.inpaint_alpha)

    out: Path = args.out
    out.mkdir(parents=True, exist_ok=True)
    write_tensor(out / "f_seed.urtd", fields["f_seed"].astype(np.float32))
    write_tensor(out / "f_comp.urtd", fields["f_comp"].astype(np.float32))
    summary = {"loss": loss, "alpha": cfg.inpaint_alpha,
               "dim": icfg.dim, "depth": icfg.depth, "heads": icfg.heads,
               "lambda": icfg.lam, "grid": list(grid.tokens.shape[:2]),
               "masked_patches": int(grid.mask.sum())}
    with open(out / "inpaint_demo.json", "w") as f:
        json.dump(summary, f, indent=2, sort_keys=True)
        f.write("\n")
    print(f"inpaint demo -> {out} (loss {loss:.6f})")
    return 0


def _json_metric(x):
    if x is None:
        return None
    if isinstance(x, float) and math.isinf(x):
        return "inf"
    return x


def cmd_eval(args) -> int:
    pred_files = sorted(p.name for p in args.pred.glob("*.png"))
    if not pred_files:
        raise SystemExit(f"no PNG files in {args.pred}")
    per_image = []
    sums: dict[str, list] = {"mse_m": [], "psnr": [], "ssim": [], "lsr": []}
    for name in pred_files:
        ref_path = args.ref / name
        if not ref_path.exists():
            raise SystemExit(f"missing reference for {name}")
        pred = srgb_to_linear(read_png(args.pred / name))
        ref = srgb_to_linear(read_png(ref_path))
        mask = None
        if args.mask is not None:
            mask_path = args.mask / name
            if mask_path.exists():
                mask = read_mask_png(mask_path)
        input_img = None
        if args.input is not None:
            in_path = args.input / name
            if in_path.exists():
                input_img = srgb_to_linear(read_png(in_path))
        rep = evaluate_pair(pred, ref, mask=mask, input_img=input_img)
        per_image.append({
            "image": name,
            "mse_m": _json_metric(rep.mse_m),
            "psnr": _json_metric(rep.psnr),
            "ssim": rep.ssim,
            "lsr": _json_metric(rep.lsr),
            "mask_coverage": rep.mask_coverage,
        })
        for key, val in (("mse_m", rep.mse_m), ("psnr", rep.psnr),
                         ("ssim", rep.ssim), ("lsr", rep.lsr)):
            if val is not None and not (isinstance(val, float) and math.isinf(val)):
                sums[key].append(val)

    aggregate = {k: (sum(v) / len(v) if v else None) for k, v in sums.items()}
    report = {
        "version": __version__,
        "lsr_definition": LSR_DEFINITION,
        "images": per_image,
        "aggregate": aggregate,
    }
    with open(args.out, "w") as f:
        json.dump(report, f, indent=2, sort_keys=True)
        f.write("\n")
    print(f"evaluated {len(per_image)} pairs -> {args.out}")
    return 0


def cmd_selfcheck(args) -> int:
    from .selfcheck import run_selfcheck

    seed = args.seed if args.seed is not None else 0
    result = run_selfcheck(seed=seed, oracle_trials=args.trials)
    text = json.dumps(result, indent=2, sort_keys=True)
    if args.out is not None:
        with open(args.out, "w") as f:
            f.write(text + "\n")
    print(text)
    return 0 if result["passed"] else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="specsynth",
        description="Synthetic specular-highlight rendering and evaluation")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("render", help="render one image with explicit parameters")
    _add_common(p)
    p.add_argument("--rgb", type=Path, required=True)
    p.add_argument("--depth", type=Path, required=True, help="PFM depth map")
    p.add_argument("--normals", type=Path, default=None,
                   help="optional normals tensor; depth-gradient normals otherwise")
    p.add_argument("--fx", type=float, default=None)
    p.add_argument("--fy", type=float, default=None)
    p.add_argument("--cx", type=float, default=None)
    p.add_argument("--cy", type=float, default=None)
    p.add_argument("--kh", type=float, required=True, help="highlight intensity")
    p.add_argument("--shininess", type=float, required=True)
    p.add_argument("--light", type=float, nargs=3, required=True,
                   metavar=("X", "Y", "Z"))
    p.add_argument("--r0", type=float, default=None)
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("dataset", help="batch synthesis from a job JSON")
    _add_common(p)
    p.add_argument("--job", type=Path, required=True)
    p.set_defaults(func=cmd_dataset)

    p = sub.add_parser("masks", help="build masks for one image")
    _add_common(p)
    p.add_argument("--rgb", type=Path, required=True)
    p.add_argument("--highlight", type=Path, default=None,
                   help="soft highlight tensor; zero map when omitted")
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=cmd_masks)

    p = sub.add_parser("inpaint-demo", help="run the token-inpainting chain")
    _add_common(p)
    p.add_argument("--tokens", type=Path, default=None,
                   help="token grid tensor (Hp, Wp, C); random when omitted")
    p.add_argument("--mask", type=Path, default=None,
                   help="patch mask tensor (Hp, Wp), nonzero = hole")
    p.add_argument("--target", type=Path, default=None,
                   help="target tokens for the loss; raw tokens when omitted")
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=cmd_inpaint_demo)

    p = sub.add_parser("eval", help="metric report over directories")
    _add_common(p)
    p.add_argument("--pred", type=Path, required=True)
    p.add_argument("--ref", type=Path, required=True)
    p.add_argument("--mask", type=Path, default=None)
    p.add_argument("--input", type=Path, default=None,
                   help="original inputs, enables the LSR metric")
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("selfcheck", help="oracle/gradient/determinism validation")
    _add_common(p)
    p.add_argument("--trials", type=int, default=1000,
                   help="oracle agreement trials")
    p.add_argument("--out", type=Path, default=None)
    p.set_defaults(func=cmd_selfcheck)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
