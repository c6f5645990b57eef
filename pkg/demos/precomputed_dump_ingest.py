"""Bring an externally generated frame dump under store discipline.

Heavy generators usually run elsewhere and leave behind a directory of
PNGs. Ingestion walks the dump, checks counts and resolutions, adopts
complete sequences, and reports anything partial or stray instead of
guessing. Two layouts work: the store's own <i>/<j>/<k>.png tree, or a
flat directory plus an explicit filename mapping.
"""

import tempfile
from pathlib import Path

from seqaug.augment import ingest_precomputed, populate_store
from seqaug.errors import IngestError
from seqaug.images import save_png
from seqaug.manifest import load_manifest
from seqaug.providers import make_provider
from seqaug.toydata import build_toy_dataset

root = Path(tempfile.mkdtemp(prefix="ingest_"))
manifest_path, _ = build_toy_dataset(
    root / "data", train_per_class=2, test_per_class=1, size=48, seed=6
)
manifest = load_manifest(manifest_path)

# fake the external tool by generating a native-layout dump ourselves,
# then stripping the bookkeeping a plain dump would not have
provider = make_provider("toy-trajectory", native_resolution=(48, 48))
dump_store, _ = populate_store(
    provider, manifest, 1, 4, 3, root / "dump", image_root=root / "data"
)
(root / "dump" / "meta.json").unlink()
(root / "dump" / ".meta.lock").unlink()

# a file that maps nowhere is refused outright, not silently skipped
save_png(dump_store.get_frame(1, 1, 1), root / "dump" / "stray.png")
try:
    ingest_precomputed(root / "dump", manifest, 1, 4)
except IngestError as e:
    print(f"refused: {e}")
(root / "dump" / "stray.png").unlink()

# a partial sequence is adopted as missing frames, reported not guessed
dump_store.frame_path(2, 1, 3).unlink()
store, report = ingest_precomputed(root / "dump", manifest, 1, 4)
print(report.summary())
print(f"store adopted in place at {store.root}")
print(f"{len(store.meta.sequence_seeds)} complete sequences registered; "
      "sequence (2,1) stays unregistered until its frame shows up")
