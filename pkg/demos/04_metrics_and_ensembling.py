"""Scoring segmentations and averaging predictions over the 8 symmetries.

Shows the confusion-count plumbing behind IoU and Dice, the color overlay
convention (green TP, red FN, blue FP), and the test-time trick of running
a model on all 8 flips/rotations of an image and averaging the predictions
after mapping them back.
"""

from pathlib import Path

import numpy as np
from PIL import Image

from emstack import (
    binarize,
    confusion,
    dice,
    flip_rotate,
    iou,
    overlay,
    rot8_average,
)

OUT = Path("demo_output/04_metrics")
OUT.mkdir(parents=True, exist_ok=True)
rng = np.random.default_rng(3)

# --- 1. counts, IoU, Dice ----------------------------------------------------
yy, xx = np.mgrid[0:96, 0:96].astype(float)
gt = (((yy - 48) ** 2 + (xx - 48) ** 2) <= 30 ** 2).astype(np.uint8)
pred = gt.copy()
pred[30:36, 20:26] = 1            # a false-positive clump
pred[44:52, 44:52] = 0            # a false-negative hole
c = confusion(pred, gt)
print(f"tp={c.tp} fp={c.fp} fn={c.fn} tn={c.tn}")
print(f"IoU  {iou(c):.4f}")
print(f"Dice {dice(c):.4f}  (= 2*IoU/(1+IoU) = {2 * iou(c) / (1 + iou(c)):.4f})")
Image.fromarray(overlay(pred, gt)).save(OUT / "overlay.png")

# --- 2. averaging predictions over the 8 symmetries ---------------------------
# Pretend "model output" is a noisy probability map of the disk. Running the
# model on each dihedral variant and averaging the undone predictions keeps
# the signal and averages out orientation-dependent noise.
clean = np.clip(gt.astype(float) * 0.9 + 0.05, 0, 1)


def fake_model(image_variant):
    return np.clip(image_variant + rng.normal(0, 0.15, image_variant.shape), 0, 1)


maps, codes = [], []
for code in range(8):
    maps.append(fake_model(flip_rotate(clean, code)))
    codes.append(code)
ensembled = rot8_average(maps, codes)
single = maps[0]

for name, prob in (("single pass", single), ("8-way average", ensembled)):
    m = binarize(prob, 0.5)
    print(f"{name:13s} IoU vs gt: {iou(confusion(m, gt)):.4f}")
Image.fromarray((ensembled * 255).astype(np.uint8), mode="L").save(
    OUT / "ensembled_probability.png")
print("outputs written to", OUT)
