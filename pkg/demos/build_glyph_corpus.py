"""Render the glyph corpus and poke at what came out.

The corpus is ten mirror-symmetric shapes. Train images sit close to a
canonical pose; test images move around in rotation, position, scale,
and brightness. That gap is exactly what sequence augmentation is
supposed to close, so the builder keeps the two pose regimes far apart
on purpose.
"""

import tempfile
from pathlib import Path

from seqaug.images import save_png
from seqaug.manifest import load_manifest
from seqaug.splits import load_split
from seqaug.toydata import GLYPHS, TEST_POSE, TRAIN_POSE, build_toy_dataset, render_glyph

out = Path(tempfile.mkdtemp(prefix="glyphs_"))
manifest_path, split_path = build_toy_dataset(
    out, train_per_class=5, test_per_class=20, size=48, seed=0
)
manifest = load_manifest(manifest_path)
split = load_split(split_path)

print(f"corpus at {out}")
print(f"{manifest.class_count} classes, {len(manifest.records)} images")
print(f"train ids {split.train_ids[0]}..{split.train_ids[-1]} "
      f"({len(split.train_ids)}), test {len(split.test_ids)}")
print(f"train pose jitter: {TRAIN_POSE}")
print(f"test pose spread:  {TEST_POSE}")

# the same glyph under increasingly rough poses
for rot in (0, 10, 25):
    arr = render_glyph(4, size=48, rotation=rot, scale=0.95, gain=0.9)
    save_png(arr, out / f"star_rot{rot}.png")
print("wrote star_rot{0,10,25}.png next to the corpus for a look")

for cls, (name, _) in enumerate(GLYPHS):
    canonical = render_glyph(cls, size=48)
    flipped = canonical[:, ::-1]
    assert (canonical == flipped).all(), name
print("all ten glyphs are mirror-symmetric, so horizontal flips are label-safe")
