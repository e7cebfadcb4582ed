"""Command-line front end.

Subcommands follow the processing chain: ``select`` labeled slices,
``refine`` a coarse stack against sparse ground truth, ``augment`` labeled
pairs, ``prepare`` windowed training pairs, ``evaluate`` predictions.
Structured output is JSON; every run that writes files also writes a
manifest echoing its configuration so the run can be replayed exactly.
The MPP_THREADS environment variable caps the worker threads used for
per-slice work (default 1, i.e. serial).
"""

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np
from PIL import Image

from . import augment as aug
from . import metrics
from .errors import EmstackError, InvalidArgumentError
from .refine import RefineConfig, refine_phases
from .stack_io import LabelAtlas, export_training_pairs, load_stack, save_stack, \
    select_labeled_slices


def _max_workers():
    try:
        return max(1, int(os.environ.get("MPP_THREADS", "1")))
    except ValueError:
        return 1


def _run_slices(fn, args_list):
    """Run fn over per-slice argument tuples, threaded when allowed."""
    workers = _max_workers()
    if workers == 1 or len(args_list) < 2:
        for a in args_list:
            fn(*a)
        return
    with ThreadPoolExecutor(max_workers=workers) as pool:
        list(pool.map(lambda a: fn(*a), args_list))


def _dump_json(obj, fh=None):
    text = json.dumps(obj, indent=2, sort_keys=True)
    if fh is None:
        sys.stdout.write(text + "\n")
    else:
        fh.write(text + "\n")


def _write_manifest(path, obj):
    with open(path, "w") as fh:
        _dump_json(obj, fh)


def _parse_gt_indices(spec, depth):
    """Either an explicit comma list ("3,8,13") or "auto:count"."""
    try:
        if spec.startswith("auto:"):
            return select_labeled_slices(depth, int(spec.split(":", 1)[1]))
        return [int(tok) for tok in spec.split(",") if tok.strip() != ""]
    except ValueError as exc:
        if isinstance(exc, InvalidArgumentError):
            raise
        raise InvalidArgumentError(f"cannot parse gt indices {spec!r}") from exc


def cmd_select(args):
    for i in select_labeled_slices(args.depth, args.count):
        print(i)
    return 0


def cmd_refine(args):
    coarse = load_stack(args.coarse, kind="mask")
    gt = load_stack(args.gt, kind="mask")
    atlas = LabelAtlas(coarse.shape[0], tuple(_parse_gt_indices(args.gt_indices,
                                                                coarse.shape[0])))
    cfg = RefineConfig(erosion_n=args.erosion_n, min_component=args.tc,
                       max_gap=args.max_gap)
    phases = refine_phases(coarse, gt, atlas, cfg)
    save_stack(phases[-1], args.out, kind="mask")
    out = Path(args.out)
    manifest_path = out.with_suffix(out.suffix + ".manifest.json") \
        if out.suffix else out / "manifest.json"
    _write_manifest(manifest_path, {
        "command": "refine",
        "config": {"coarse": str(args.coarse), "gt": str(args.gt),
                   "gt_indices": list(atlas.gt_indices),
                   "erosion_n": cfg.erosion_n, "tc": cfg.min_component,
                   "max_gap": cfg.max_gap, "out": str(args.out)},
        "phase_foreground": [int(np.count_nonzero(p)) for p in phases],
    })
    return 0


def cmd_augment(args):
    images = load_stack(args.images, kind="gray")
    masks = load_stack(args.masks, kind="mask")
    if images.shape != masks.shape:
        raise InvalidArgumentError(
            f"images {images.shape} and masks {masks.shape} do not align")
    out = Path(args.out)
    img_dir = out / "images"
    mask_dir = out / "masks"
    img_dir.mkdir(parents=True, exist_ok=True)
    mask_dir.mkdir(parents=True, exist_ok=True)
    pa_cfg = aug.PiecewiseAffineConfig(
        sigma_p_range=(args.sigma_p_min, args.sigma_p_max))
    el_cfg = aug.ElasticConfig(alpha=args.alpha, sigma_e=args.sigma_e) \
        if args.elastic else None

    def one(i, k):
        seed = int(np.random.SeedSequence([args.seed, i, k])
                   .generate_state(1, dtype=np.uint64)[0])
        img_out, mask_out = aug.augment_pair(
            images[i], masks[i], pa_cfg=pa_cfg, elastic_cfg=el_cfg,
            use_flip_rotate=not args.no_flip_rotate, seed=seed)
        Image.fromarray(img_out.astype(np.uint8), mode="L").save(
            img_dir / f"{i:05d}_{k:02d}.png")
        Image.fromarray(mask_out.astype(np.uint8) * np.uint8(255), mode="L").save(
            mask_dir / f"{i:05d}_{k:02d}.png")

    _run_slices(one, [(i, k) for i in range(images.shape[0])
                      for k in range(args.count)])
    _write_manifest(out / "manifest.json", {
        "command": "augment",
        "config": {"images": str(args.images), "masks": str(args.masks),
                   "count": args.count, "seed": args.seed,
                   "sigma_p_min": args.sigma_p_min,
                   "sigma_p_max": args.sigma_p_max,
                   "flip_rotate": not args.no_flip_rotate,
                   "elastic": bool(args.elastic),
                   "alpha": args.alpha, "sigma_e": args.sigma_e,
                   "out": str(args.out)},
        "pairs_written": images.shape[0] * args.count,
    })
    return 0


def cmd_prepare(args):
    coarse = load_stack(args.coarse, kind="mask")
    refined = load_stack(args.refined, kind="mask")
    atlas = LabelAtlas(coarse.shape[0], tuple(_parse_gt_indices(args.atlas,
                                                                coarse.shape[0])))
    manifest = export_training_pairs(coarse, refined, atlas, args.window_n,
                                     args.out)
    manifest["config"] = {"coarse": str(args.coarse),
                          "refined": str(args.refined),
                          "atlas": list(atlas.gt_indices),
                          "window_n": args.window_n, "out": str(args.out)}
    _write_manifest(Path(args.out) / "manifest.json", manifest)
    return 0


def cmd_evaluate(args):
    pred = load_stack(args.pred, kind="mask")
    gt = load_stack(args.gt, kind="mask")
    per_slice = [metrics.confusion(p, g) for p, g in zip(pred, gt)]
    total = metrics.confusion(pred, gt)
    report = {
        "iou": metrics.iou(total), "dice": metrics.dice(total),
        "tp": total.tp, "fp": total.fp, "fn": total.fn, "tn": total.tn,
        "per_slice": [{"index": i, "iou": metrics.iou(c), "dice": metrics.dice(c),
                       "tp": c.tp, "fp": c.fp, "fn": c.fn, "tn": c.tn}
                      for i, c in enumerate(per_slice)],
    }
    if args.overlay_dir:
        overlay_dir = Path(args.overlay_dir)
        overlay_dir.mkdir(parents=True, exist_ok=True)

        def one(i):
            rgb = metrics.overlay(pred[i], gt[i])
            Image.fromarray(rgb, mode="RGB").save(overlay_dir / f"overlay_{i:05d}.png")

        _run_slices(one, [(i,) for i in range(pred.shape[0])])
    _dump_json(report)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="emstack",
        description="Refine, augment, window, and evaluate EM segmentation stacks.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("select", help="pick labeled slice indices at equal intervals")
    p.add_argument("--depth", type=int, required=True)
    p.add_argument("--count", type=int, required=True)
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("refine", help="morphological refinement of a coarse stack")
    p.add_argument("--coarse", required=True, help="coarse mask stack (TIFF or PNG dir)")
    p.add_argument("--gt", required=True, help="stack holding ground-truth slices")
    p.add_argument("--gt-indices", required=True,
                   help="comma list of slice indices, or auto:COUNT")
    p.add_argument("--erosion-n", type=int, default=3,
                   help="erosion repetitions per slice of distance (default 3)")
    p.add_argument("--tc", type=int, default=64,
                   help="drop eroded components below this pixel count (default 64)")
    p.add_argument("--max-gap", type=int, default=None,
                   help="widest bridged run of unlabeled slices "
                        "(default: ground-truth spacing)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_refine)

    p = sub.add_parser("augment", help="write augmented image/mask pairs")
    p.add_argument("--images", required=True)
    p.add_argument("--masks", required=True)
    p.add_argument("--count", type=int, default=1,
                   help="augmentations per slice (default 1)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--sigma-p-min", type=float, default=0.01)
    p.add_argument("--sigma-p-max", type=float, default=0.05)
    p.add_argument("--no-flip-rotate", action="store_true")
    p.add_argument("--elastic", action="store_true",
                   help="append elastic deformation (comparison studies)")
    p.add_argument("--alpha", type=float, default=40.0)
    p.add_argument("--sigma-e", type=float, default=5.0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_augment)

    p = sub.add_parser("prepare", help="export windowed training pairs")
    p.add_argument("--coarse", required=True)
    p.add_argument("--refined", required=True)
    p.add_argument("--atlas", required=True,
                   help="comma list of ground-truth indices, or auto:COUNT")
    p.add_argument("--window-n", type=int, default=15)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_prepare)

    p = sub.add_parser("evaluate", help="IoU/Dice report, optional overlays")
    p.add_argument("--pred", required=True)
    p.add_argument("--gt", required=True)
    p.add_argument("--overlay-dir", default=None)
    p.set_defaults(func=cmd_evaluate)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except EmstackError as exc:
        print(f"error [{exc.category}]: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error [io]: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
