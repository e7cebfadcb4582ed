"""Stack IO, labeled-slice selection, and slice-window assembly.

A stack is a numpy array of shape (depth, height, width). Grayscale stacks
are uint8 intensities; mask stacks are uint8 with values in {0, 1}. Two
on-disk layouts are supported for both kinds:

* a multi-page 8-bit grayscale TIFF (uncompressed or deflate), or
* a directory of equally sized 8-bit PNG slices whose zero-padded numeric
  filenames give the z order.

Masks are stored as 0/255 images and thresholded at >127 on load.
"""

import json
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np
import tifffile
from PIL import Image

from .errors import (
    DimensionMismatchError,
    EmptyInputError,
    InvalidArgumentError,
    StackIOError,
)

MANIFEST_NAME = "manifest.json"


class SliceRole(str, Enum):
    GROUND_TRUTH = "gt"
    COARSE = "coarse"
    SOFT = "soft"


@dataclass(frozen=True)
class LabelAtlas:
    """Per-slice role assignment: which slices of a stack carry ground truth.

    ``gt_indices`` must be strictly increasing and inside [0, depth).
    Slices not listed are coarse labels before refinement and soft labels
    after.
    """

    depth: int
    gt_indices: tuple

    def __post_init__(self):
        idx = tuple(int(i) for i in self.gt_indices)
        object.__setattr__(self, "gt_indices", idx)
        if self.depth < 1:
            raise InvalidArgumentError(f"depth must be >= 1, got {self.depth}")
        if any(b <= a for a, b in zip(idx, idx[1:])):
            raise InvalidArgumentError(f"gt_indices not strictly increasing: {idx}")
        if idx and (idx[0] < 0 or idx[-1] >= self.depth):
            raise InvalidArgumentError(
                f"gt_indices out of range [0, {self.depth}): {idx}")

    def is_gt(self, i):
        return i in set(self.gt_indices)

    @property
    def roles(self):
        gt = set(self.gt_indices)
        return tuple(SliceRole.GROUND_TRUTH if i in gt else SliceRole.COARSE
                     for i in range(self.depth))

    @classmethod
    def equal_interval(cls, depth, count):
        """Atlas whose GT slices are chosen by select_labeled_slices."""
        return cls(depth, tuple(select_labeled_slices(depth, count)))


@dataclass(frozen=True)
class SliceWindow:
    """A block of n consecutive slices centered on one slice.

    ``channels`` has shape (n, height, width); channel k holds the slice at
    clamp(center - (n-1)/2 + k, 0, depth-1), so both stack ends are padded
    by repeating the nearest slice.
    """

    channels: np.ndarray
    center: int

    @property
    def n_channels(self):
        return self.channels.shape[0]


def _to_mask(arr):
    return (arr > 127).astype(np.uint8)


def _check_uint8(arr, path):
    if arr.dtype != np.uint8:
        raise InvalidArgumentError(
            f"{path}: only 8-bit grayscale images are supported, got {arr.dtype}")


def _load_tiff(path, kind):
    try:
        with tifffile.TiffFile(path) as tf:
            planes = [page.asarray() for page in tf.pages]
    except (tifffile.TiffFileError, ValueError) as exc:
        raise StackIOError(f"cannot read TIFF {path}: {exc}") from exc
    if not planes:
        raise EmptyInputError(f"{path}: TIFF contains no pages")
    shapes = {p.shape for p in planes}
    if len(shapes) != 1 or planes[0].ndim != 2:
        raise DimensionMismatchError(f"{path}: mixed page shapes {sorted(shapes)}")
    stack = np.stack(planes)
    _check_uint8(stack, path)
    return _to_mask(stack) if kind == "mask" else stack


def _load_png_dir(path, kind):
    files = sorted(p for p in Path(path).iterdir() if p.suffix.lower() == ".png")
    if not files:
        raise EmptyInputError(f"{path}: directory contains no PNG slices")
    planes = []
    for f in files:
        try:
            with Image.open(f) as img:
                if img.mode in ("I", "I;16", "I;16B", "F"):
                    raise InvalidArgumentError(
                        f"{f}: only 8-bit images are supported, got mode {img.mode}")
                planes.append(np.asarray(img.convert("L")))
        except Image.UnidentifiedImageError as exc:
            raise StackIOError(f"cannot read PNG {f}: {exc}") from exc
    shapes = {p.shape for p in planes}
    if len(shapes) != 1:
        raise DimensionMismatchError(f"{path}: mixed slice shapes {sorted(shapes)}")
    stack = np.stack(planes)
    return _to_mask(stack) if kind == "mask" else stack


def load_stack(path, kind="gray"):
    """Load a (depth, height, width) uint8 stack from TIFF or a PNG directory.

    kind="gray" returns raw intensities; kind="mask" thresholds at >127 and
    returns values in {0, 1}.
    """
    if kind not in ("gray", "mask"):
        raise InvalidArgumentError(f"kind must be 'gray' or 'mask', got {kind!r}")
    path = Path(path)
    if path.is_dir():
        return _load_png_dir(path, kind)
    if not path.exists():
        raise StackIOError(f"no such file or directory: {path}")
    return _load_tiff(path, kind)


def _encode(stack, kind):
    arr = np.asarray(stack)
    if arr.ndim != 3:
        raise DimensionMismatchError(f"stack must be 3D, got shape {arr.shape}")
    if kind == "mask":
        vals = np.unique(arr)
        if not np.isin(vals, (0, 1)).all():
            raise InvalidArgumentError(f"mask voxels must be 0/1, found {vals[:8]}")
        return (arr.astype(np.uint8)) * np.uint8(255)
    if arr.dtype != np.uint8:
        raise InvalidArgumentError(f"gray stack must be uint8, got {arr.dtype}")
    return arr


def save_stack(stack, path, kind="gray"):
    """Write a stack so that load_stack(path, kind) reproduces it exactly.

    A ``.tif``/``.tiff`` path gets a multi-page TIFF; any other path is
    treated as a directory of zero-padded PNG slices. Masks are written as
    0/255.
    """
    data = _encode(stack, kind)
    path = Path(path)
    if path.suffix.lower() in (".tif", ".tiff"):
        path.parent.mkdir(parents=True, exist_ok=True)
        tifffile.imwrite(path, data, photometric="minisblack")
        return
    path.mkdir(parents=True, exist_ok=True)
    for stale in path.glob("*.png"):  # a longer previous stack must not linger
        stale.unlink()
    for i, plane in enumerate(data):
        Image.fromarray(plane, mode="L").save(path / f"{i:05d}.png")


def select_labeled_slices(depth, count):
    """Pick ``count`` slice indices at equal intervals, centered in the stack.

    stride = depth // count and the run of indices is shifted so the unused
    slices split as evenly as possible between the two stack ends:
    offset = (depth - (count - 1) * stride - 1) // 2.
    """
    if count < 1:
        raise InvalidArgumentError(f"count must be >= 1, got {count}")
    if count > depth:
        raise InvalidArgumentError(f"count {count} exceeds depth {depth}")
    stride = depth // count
    offset = (depth - (count - 1) * stride - 1) // 2
    return [offset + k * stride for k in range(count)]


def assemble_window(stack, center, n):
    """Gather the n slices around ``center`` with nearest padding at the ends.

    n must be odd; n=1 returns just the center slice.
    """
    arr = np.asarray(stack)
    if arr.ndim != 3:
        raise DimensionMismatchError(f"stack must be 3D, got shape {arr.shape}")
    if n < 1 or n % 2 == 0:
        raise InvalidArgumentError(f"window size must be odd and >= 1, got {n}")
    depth = arr.shape[0]
    if not 0 <= center < depth:
        raise InvalidArgumentError(f"center {center} outside [0, {depth})")
    idx = np.clip(center - (n - 1) // 2 + np.arange(n), 0, depth - 1)
    return SliceWindow(channels=arr[idx].copy(), center=int(center))


def export_training_pairs(coarse, refined, atlas, n, path):
    """Write (window, target) training pairs plus a JSON manifest.

    For every slice i the n-channel window of the coarse stack centered at
    i becomes the input (multi-page TIFF) and refined slice i the target
    (PNG). The manifest records, per pair, the center index, both file
    names, and whether the target is ground truth or a soft label.
    Returns the manifest dict.
    """
    coarse = np.asarray(coarse)
    refined = np.asarray(refined)
    if coarse.shape != refined.shape:
        raise DimensionMismatchError(
            f"coarse {coarse.shape} and refined {refined.shape} differ")
    if atlas.depth != coarse.shape[0]:
        raise DimensionMismatchError(
            f"atlas depth {atlas.depth} != stack depth {coarse.shape[0]}")
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    gt = set(atlas.gt_indices)
    pairs = []
    for i in range(coarse.shape[0]):
        window = assemble_window(coarse, i, n)
        input_name = f"pair_{i:05d}_input.tif"
        target_name = f"pair_{i:05d}_target.png"
        save_stack(window.channels, out / input_name, kind="mask")
        Image.fromarray(refined[i].astype(np.uint8) * np.uint8(255),
                        mode="L").save(out / target_name)
        role = SliceRole.GROUND_TRUTH if i in gt else SliceRole.SOFT
        pairs.append({"center": i, "input": input_name,
                      "target": target_name, "role": role.value})
    manifest = {"pairs": pairs, "window_n": int(n)}
    with open(out / MANIFEST_NAME, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
    return manifest
