"""Binary morphological primitives on 2D mask slices.

All functions take and return uint8 arrays with values in {0, 1}. They are
pure: inputs are never modified in place.
"""

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import DimensionMismatchError

# Fixed 3x3 all-ones structuring element; also defines 8-connectivity.
_KERNEL = np.ones((3, 3), dtype=np.uint8)


def _as_binary(slice_, name="slice"):
    arr = np.asarray(slice_)
    if arr.ndim != 2:
        raise DimensionMismatchError(f"{name} must be 2D, got shape {arr.shape}")
    return arr.astype(bool)


def erode(slice_, times=1):
    """Erode a binary slice with the 3x3 all-ones kernel, ``times`` times.

    Pixels outside the image count as background, so foreground touching
    the border is stripped. ``times=0`` returns the input unchanged.
    """
    arr = _as_binary(slice_)
    if times < 0:
        raise ValueError(f"times must be >= 0, got {times}")
    if times == 0:
        return arr.astype(np.uint8)
    # scipy treats iterations=0 as "until convergence", hence the guard above
    out = ndimage.binary_erosion(arr, structure=_KERNEL, iterations=int(times),
                                 border_value=0)
    return out.astype(np.uint8)


def union(a, b):
    """Pixelwise OR of two equally sized binary slices."""
    a, b = _as_binary(a, "a"), _as_binary(b, "b")
    if a.shape != b.shape:
        raise DimensionMismatchError(f"shape mismatch: {a.shape} vs {b.shape}")
    return np.logical_or(a, b).astype(np.uint8)


def intersect(a, b):
    """Pixelwise AND of two equally sized binary slices."""
    a, b = _as_binary(a, "a"), _as_binary(b, "b")
    if a.shape != b.shape:
        raise DimensionMismatchError(f"shape mismatch: {a.shape} vs {b.shape}")
    return np.logical_and(a, b).astype(np.uint8)


@dataclass(frozen=True)
class ComponentLabeling:
    """8-connected component labeling of one slice.

    labels: per-pixel component id, 0 = background, ids 1..count contiguous
            in raster-scan order of each component's first pixel.
    count:  number of foreground components.
    sizes:  pixel count per id; ``sizes[c]`` for c in 1..count,
            ``sizes[0]`` is the background pixel count.
    """

    labels: np.ndarray
    count: int
    sizes: np.ndarray


def connected_components(slice_):
    """Label 8-connected foreground components, ids in raster-scan order."""
    arr = _as_binary(slice_)
    raw, n = ndimage.label(arr, structure=_KERNEL)
    if n == 0:
        return ComponentLabeling(raw.astype(np.int32), 0,
                                 np.array([arr.size], dtype=np.int64))
    # Renumber so ids follow the raster position of each component's first
    # pixel; scipy does not guarantee this ordering.
    flat = raw.ravel()
    ids, first = np.unique(flat, return_index=True)
    fg = ids > 0
    order = np.argsort(first[fg], kind="stable")
    remap = np.zeros(n + 1, dtype=np.int32)
    remap[ids[fg][order]] = np.arange(1, n + 1, dtype=np.int32)
    labels = remap[raw]
    sizes = np.bincount(labels.ravel(), minlength=n + 1).astype(np.int64)
    return ComponentLabeling(labels, int(n), sizes)


def remove_small_components(slice_, min_size):
    """Drop 8-connected components smaller than ``min_size`` pixels."""
    if min_size < 0:
        raise ValueError(f"min_size must be >= 0, got {min_size}")
    cc = connected_components(slice_)
    if cc.count == 0:
        return cc.labels.astype(np.uint8)
    keep = cc.sizes >= min_size
    keep[0] = False
    return keep[cc.labels].astype(np.uint8)
