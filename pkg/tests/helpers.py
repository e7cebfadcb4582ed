"""Independent oracles and synthetic fixtures shared across the test suite.

Everything here is deliberately implemented from first principles (loops,
flood fill, shifted copies) so it exercises none of the code paths it is
used to check.
"""

from collections import deque

import numpy as np


def erode_oracle(mask, times):
    """Brute-force 9-neighbor erosion: a pixel survives iff all neighbors
    (out-of-image treated as background) are foreground."""
    out = np.asarray(mask, dtype=np.uint8).copy()
    for _ in range(times):
        padded = np.zeros((out.shape[0] + 2, out.shape[1] + 2), np.uint8)
        padded[1:-1, 1:-1] = out
        shifts = [padded[1 + dy:padded.shape[0] - 1 + dy,
                         1 + dx:padded.shape[1] - 1 + dx]
                  for dy in (-1, 0, 1) for dx in (-1, 0, 1)]
        out = np.min(np.stack(shifts), axis=0)
    return out


def flood_fill_components(mask):
    """8-connected components by explicit BFS; returns (count, sorted sizes)."""
    mask = np.asarray(mask)
    h, w = mask.shape
    seen = np.zeros((h, w), bool)
    sizes = []
    for y in range(h):
        for x in range(w):
            if not mask[y, x] or seen[y, x]:
                continue
            size = 0
            queue = deque([(y, x)])
            seen[y, x] = True
            while queue:
                cy, cx = queue.popleft()
                size += 1
                for dy in (-1, 0, 1):
                    for dx in (-1, 0, 1):
                        ny, nx = cy + dy, cx + dx
                        if 0 <= ny < h and 0 <= nx < w and mask[ny, nx] \
                                and not seen[ny, nx]:
                            seen[ny, nx] = True
                            queue.append((ny, nx))
            sizes.append(size)
    return len(sizes), sorted(sizes)


def confusion_oracle(pred, gt):
    """Per-pixel counting loop; returns (tp, fp, fn, tn)."""
    tp = fp = fn = tn = 0
    for p, g in zip(np.asarray(pred).ravel(), np.asarray(gt).ravel()):
        if p and g:
            tp += 1
        elif p and not g:
            fp += 1
        elif not p and g:
            fn += 1
        else:
            tn += 1
    return tp, fp, fn, tn


def window_indices_oracle(depth, center, n):
    """Clamped index arithmetic, spelled out."""
    idx = []
    for k in range(n):
        raw = center - (n - 1) // 2 + k
        idx.append(min(max(raw, 0), depth - 1))
    return idx


def ellipse_slice(height, width, cy, cx, ry, rx):
    yy, xx = np.mgrid[0:height, 0:width].astype(np.float64)
    return ((((yy - cy) / ry) ** 2 + ((xx - cx) / rx) ** 2) <= 1.0) \
        .astype(np.uint8)


def make_tube_volume(depth=64, height=128, width=128):
    """Dense ground truth: a slowly deforming ellipsoidal tube along z."""
    vol = np.zeros((depth, height, width), np.uint8)
    for z in range(depth):
        t = z / depth
        cy = height / 2 + 10 * np.sin(2 * np.pi * t * 0.8)
        cx = width / 2 + 12 * np.cos(2 * np.pi * t * 0.6)
        ry = 22 + 5 * np.sin(2 * np.pi * t * 0.5)
        rx = 30 + 6 * np.cos(2 * np.pi * t * 0.4)
        vol[z] = ellipse_slice(height, width, cy, cx, ry, rx)
    return vol


def corrupt_volume(dense_gt, gt_indices, seed=0, salt_fraction=0.02,
                   n_holes=3, hole=5, blob=3):
    """Coarse stack: salt FP blobs and punched FN holes on non-GT slices."""
    rng = np.random.default_rng(seed)
    depth, h, w = dense_gt.shape
    gt_set = set(gt_indices)
    coarse = dense_gt.copy()
    n_blobs = int(round(salt_fraction * h * w / (blob * blob)))
    for z in range(depth):
        if z in gt_set:
            continue
        for _ in range(n_blobs):
            y = int(rng.integers(0, h - blob))
            x = int(rng.integers(0, w - blob))
            coarse[z, y:y + blob, x:x + blob] = 1
        fg = np.argwhere(dense_gt[z])
        for _ in range(n_holes):
            y, x = fg[int(rng.integers(0, len(fg)))]
            y0, x0 = max(0, y - hole // 2), max(0, x - hole // 2)
            coarse[z, y0:y0 + hole, x0:x0 + hole] = 0
    return coarse
