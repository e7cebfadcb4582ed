"""Walk through labeled-slice selection and N-channel window assembly.

A 3D EM stack is a pile of 2D slices. When only a budgeted number of
slices can be annotated, picking them at equal intervals balances local
context against coverage of the whole volume. Downstream, a per-slice
model consumes a window of N adjacent mask slices centered on the slice
it predicts, with the stack ends padded by repeating the nearest slice.
"""

import json
from pathlib import Path

import numpy as np

from emstack import (
    LabelAtlas,
    assemble_window,
    export_training_pairs,
    select_labeled_slices,
)

OUT = Path("demo_output/01_select_and_windows")
OUT.mkdir(parents=True, exist_ok=True)

# --- 1. equal-interval selection -----------------------------------------
# A 165-slice stack with a 32-slice annotation budget: stride 5, and the
# leftover slices split between the two ends of the stack.
depth, budget = 165, 32
picks = select_labeled_slices(depth, budget)
print(f"{budget} labeled slices out of {depth}:")
print(" ", picks)
print("  stride:", picks[1] - picks[0],
      "| unused at ends:", picks[0], "and", depth - 1 - picks[-1])

# The same call scales down: a 50-slice stack with 10 labels.
print("50-slice stack, 10 labels:", select_labeled_slices(50, 10))

# --- 2. window assembly with nearest padding ------------------------------
# Toy mask stack whose slice i is a square that grows with i, so each
# window channel is recognizable by its foreground size.
stack = np.zeros((20, 32, 32), np.uint8)
for i in range(20):
    stack[i, 8:9 + i, 8:9 + i] = 1

for center in (0, 10, 19):
    window = assemble_window(stack, center, n=7)
    sizes = [int(c.sum()) for c in window.channels]
    print(f"window at slice {center:2d}: channel foreground sizes {sizes}")
# At the ends the repeated nearest slice shows up as repeated sizes.

# --- 3. exporting training pairs -----------------------------------------
# Pair every slice's coarse window with its refined slice and record who
# is real ground truth and who is a soft label.
atlas = LabelAtlas.equal_interval(20, 4)
refined = stack  # stand-in: any refined stack of the same shape
manifest = export_training_pairs(stack, refined, atlas, n=7, path=OUT / "pairs")
roles = {}
for pair in manifest["pairs"]:
    roles[pair["role"]] = roles.get(pair["role"], 0) + 1
print("exported", len(manifest["pairs"]), "pairs:", roles,
      "| ground-truth slices:", list(atlas.gt_indices))
print("manifest written to", OUT / "pairs" / "manifest.json")
print(json.dumps(manifest["pairs"][0], indent=2))
