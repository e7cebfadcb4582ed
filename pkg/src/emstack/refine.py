"""Morphological post-processing of coarse segmentation stacks.

Turns a coarse binary stack plus sparse ground-truth slices into a
soft-label stack, exploiting the fact that foreground regions of adjacent
slices overlap heavily. Four phases run in order, each reading only the
previous phase's result:

1. ground-truth slices replace their coarse slices verbatim;
2. every other slice is unioned with its nearest ground-truth slice,
   eroded in proportion to the slice distance and cleaned of small
   components;
3. slices bracketed by ground truth on both sides (within the configured
   gap) are intersected with the union of the two bracketing slices, then
   unioned with their intersection;
4. phase 3 is repeated once with the immediate neighbors, which by now
   are all refined, using the frozen phase-3 result.

Ground-truth slices pass through to the output untouched in all phases.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, InvalidArgumentError
from .morphology import erode, intersect, remove_small_components, union


@dataclass(frozen=True)
class RefineConfig:
    """Tuning knobs of the refinement pipeline.

    erosion_n:     erosion repetitions applied to a ground-truth slice per
                   unit of slice distance; stacks with lower z resolution
                   want a larger value.
    min_component: components smaller than this (pixels) are dropped from
                   the eroded ground truth before the union (the --tc flag).
    max_gap:       widest run of consecutive unreliable slices phase 3 will
                   bridge; None derives it from the spacing of the
                   ground-truth slices.
    """

    erosion_n: int = 3
    min_component: int = 64
    max_gap: int | None = None

    def __post_init__(self):
        if self.erosion_n < 0:
            raise InvalidArgumentError(f"erosion_n must be >= 0: {self.erosion_n}")
        if self.min_component < 0:
            raise InvalidArgumentError(
                f"min_component must be >= 0: {self.min_component}")
        if self.max_gap is not None and self.max_gap < 1:
            raise InvalidArgumentError(f"max_gap must be >= 1: {self.max_gap}")


def foreground_union_step(coarse, gt, distance, cfg):
    """Union a coarse slice with its distance-eroded ground-truth slice.

    The ground truth is eroded cfg.erosion_n * distance times, cleaned of
    components below cfg.min_component pixels, and OR-ed into the coarse
    slice, so the output is always a superset of the coarse input.
    """
    if distance < 1:
        raise InvalidArgumentError(f"distance must be >= 1, got {distance}")
    shrunk = erode(gt, cfg.erosion_n * int(distance))
    shrunk = remove_small_components(shrunk, cfg.min_component)
    return union(coarse, shrunk)


def continuity_intersect_step(current, left, right):
    """Keep only pixels backed by at least one of the two neighbor slices."""
    return intersect(current, union(left, right))


def continuity_union_step(current, left, right):
    """Add pixels that both neighbor slices agree are foreground."""
    return union(current, intersect(left, right))


def nearest_gt_index(gt_indices, i):
    """Ground-truth index closest to i; ties go to the smaller index."""
    arr = np.asarray(gt_indices)
    return int(arr[np.argmin(np.abs(arr - i))])


def _resolve_max_gap(cfg, gt_indices):
    if cfg.max_gap is not None:
        return cfg.max_gap
    if len(gt_indices) < 2:
        return 1
    return max(int(b - a) for a, b in zip(gt_indices, gt_indices[1:]))


def _check_inputs(coarse, gt, atlas):
    coarse = np.asarray(coarse)
    gt = np.asarray(gt)
    if coarse.ndim != 3:
        raise DimensionMismatchError(f"coarse must be 3D, got {coarse.shape}")
    if coarse.shape != gt.shape:
        raise DimensionMismatchError(
            f"coarse {coarse.shape} and gt {gt.shape} differ")
    if atlas.depth != coarse.shape[0]:
        raise DimensionMismatchError(
            f"atlas depth {atlas.depth} != stack depth {coarse.shape[0]}")
    if not atlas.gt_indices:
        raise InvalidArgumentError(
            "refinement needs at least one ground-truth slice")
    return coarse, gt


def refine_phases(coarse, gt, atlas, cfg=RefineConfig()):
    """Run the pipeline and return the stack after each of the four phases."""
    coarse, gt = _check_inputs(coarse, gt, atlas)
    gt_set = set(atlas.gt_indices)
    gt_idx = list(atlas.gt_indices)
    depth = coarse.shape[0]
    max_gap = _resolve_max_gap(cfg, gt_idx)

    # phase 1: ground truth replaces coarse verbatim
    p1 = coarse.astype(np.uint8).copy()
    for i in gt_idx:
        p1[i] = gt[i]

    # phase 2: union with the nearest ground-truth slice, eroded by distance
    p2 = p1.copy()
    for i in range(depth):
        if i in gt_set:
            continue
        j = nearest_gt_index(gt_idx, i)
        p2[i] = foreground_union_step(p1[i], gt[j], abs(i - j), cfg)

    # phase 3: bracketing ground-truth pair within reach on both sides
    below = {}
    above = {}
    for i in range(depth):
        lo = [j for j in gt_idx if j < i]
        hi = [j for j in gt_idx if j > i]
        below[i] = lo[-1] if lo else None
        above[i] = hi[0] if hi else None
    p3 = p2.copy()
    for i in range(depth):
        if i in gt_set:
            continue
        g_l, g_k = below[i], above[i]
        if g_l is None or g_k is None:
            continue
        if i - g_l > max_gap + 1 or g_k - i > max_gap + 1:
            continue
        s = continuity_intersect_step(p2[i], gt[g_l], gt[g_k])
        p3[i] = continuity_union_step(s, gt[g_l], gt[g_k])

    # phase 4: same with the immediate neighbors, all reliable by now;
    # reads the frozen phase-3 stack, never in-place updates
    p4 = p3.copy()
    for i in range(depth):
        if i in gt_set or i == 0 or i == depth - 1:
            continue
        s = continuity_intersect_step(p3[i], p3[i - 1], p3[i + 1])
        p4[i] = continuity_union_step(s, p3[i - 1], p3[i + 1])

    return [p1, p2, p3, p4]


def refine_stack(coarse, gt, atlas, cfg=RefineConfig()):
    """Refine a coarse stack into a soft-label stack (final phase only)."""
    return refine_phases(coarse, gt, atlas, cfg)[-1]
