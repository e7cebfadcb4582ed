"""Segmentation evaluation: confusion counts, IoU/Dice, TP/FP/FN overlays,
and averaging of predictions over the 8 flip/rotation symmetries."""

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, InvalidArgumentError
from .augment import flip_rotate, inverse_code

OVERLAY_TP = (0, 255, 0)
OVERLAY_FN = (255, 0, 0)
OVERLAY_FP = (0, 0, 255)


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    fn: int
    tn: int

    @property
    def total(self):
        return self.tp + self.fp + self.fn + self.tn

    def __add__(self, other):
        return ConfusionCounts(self.tp + other.tp, self.fp + other.fp,
                               self.fn + other.fn, self.tn + other.tn)


def confusion(pred, gt):
    """Pixelwise confusion counts, foreground (1) as the positive class.

    Works on slices and whole stacks alike; shapes must match.
    """
    pred = np.asarray(pred).astype(bool)
    gt = np.asarray(gt).astype(bool)
    if pred.shape != gt.shape:
        raise DimensionMismatchError(
            f"pred {pred.shape} and gt {gt.shape} differ")
    tp = int(np.count_nonzero(pred & gt))
    fp = int(np.count_nonzero(pred & ~gt))
    fn = int(np.count_nonzero(~pred & gt))
    tn = pred.size - tp - fp - fn
    return ConfusionCounts(tp, fp, fn, tn)


def iou(c):
    """Intersection over union. Both-empty counts as perfect agreement (1.0)."""
    denom = c.tp + c.fp + c.fn
    return 1.0 if denom == 0 else c.tp / denom


def dice(c):
    """Dice / F1 overlap; equals 2*iou/(1+iou). Both-empty gives 1.0."""
    denom = 2 * c.tp + c.fp + c.fn
    return 1.0 if denom == 0 else 2 * c.tp / denom


def overlay(pred, gt):
    """RGB error map: TP green, FN red, FP blue, TN black."""
    pred = np.asarray(pred).astype(bool)
    gt = np.asarray(gt).astype(bool)
    if pred.shape != gt.shape or pred.ndim != 2:
        raise DimensionMismatchError(
            f"need matching 2D slices, got {pred.shape} and {gt.shape}")
    rgb = np.zeros(pred.shape + (3,), dtype=np.uint8)
    rgb[pred & gt] = OVERLAY_TP
    rgb[~pred & gt] = OVERLAY_FN
    rgb[pred & ~gt] = OVERLAY_FP
    return rgb


def binarize(prob_map, threshold=0.5):
    """Threshold a [0, 1] probability map; values >= threshold become 1."""
    if not 0.0 <= threshold <= 1.0:
        raise InvalidArgumentError(f"threshold must be in [0, 1], got {threshold}")
    return (np.asarray(prob_map) >= threshold).astype(np.uint8)


def rot8_average(maps, codes):
    """Average predictions made on the 8 dihedral variants of one image.

    Each map is brought back to the original frame by undoing its code,
    then all eight are averaged pixelwise. The sum runs in canonical code
    order with a pairwise tree, so the result is independent of the order
    the (map, code) pairs are supplied in, bit for bit.
    """
    maps = list(maps)
    codes = [int(c) for c in codes]
    if len(maps) != 8 or len(codes) != 8:
        raise InvalidArgumentError("need exactly 8 maps and 8 codes")
    if sorted(codes) != list(range(8)):
        raise InvalidArgumentError(f"codes must be the 8 distinct symmetries: {codes}")
    by_code = dict(zip(codes, maps))
    undone = [np.asarray(flip_rotate(by_code[c], inverse_code(c)), dtype=np.float64)
              for c in range(8)]
    shapes = {u.shape for u in undone}
    if len(shapes) != 1:
        raise DimensionMismatchError(
            f"maps disagree in shape after undoing their codes: {sorted(shapes)}")
    s = ((undone[0] + undone[1]) + (undone[2] + undone[3])) \
        + ((undone[4] + undone[5]) + (undone[6] + undone[7]))
    return s / 8.0
