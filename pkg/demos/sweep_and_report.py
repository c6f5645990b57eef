"""Drive the command-line workflow end to end in one process.

generate -> sweep (interrupted, then resumed) -> report. The sweep
appends one record per grid cell to runs.jsonl and skips anything
already recorded, so re-running after a crash does no duplicate work.
"""

import tempfile
from pathlib import Path

from seqaug.cli import main
from seqaug.results import load_runs
from seqaug.toydata import build_toy_dataset

CONFIG = """\
[dataset]
manifest = "data/manifest.tsv"
image_root = "data"
name = "toy"

[split]
source = "data/split.txt"

[provider]
store = "store"
m = 2
k = 8
base_seed = 11
native_width = 32
native_height = 32

[model]
backbone = "cnn-tiny"

[train]
lr0 = 0.05
epochs = 7
batch_size = 8

[transforms]
out_size = 16
level = "None"
scale = [1.0, 1.0]
hflip = false

[run]
method = "SGIA"
btl = false
seeds = [0]
output = "runs"
"""

root = Path(tempfile.mkdtemp(prefix="sweep_"))
build_toy_dataset(root / "data", train_per_class=3, test_per_class=2, size=32, seed=4)
config = root / "exp.toml"
config.write_text(CONFIG, encoding="utf-8")

assert main(["generate", "--config", str(config)]) == 0

# half the grid first, as if the job had been killed partway
assert main(["sweep", "--config", str(config), "--alpha", "0.2,0.4", "--m", "1,2"]) == 0
# the full grid resumes: the four cells above are skipped
assert main(["sweep", "--config", str(config), "--alpha", "0.2,0.4,0.6,0.8", "--m", "1,2"]) == 0

rows = load_runs(root / "runs" / "runs.jsonl")
print(f"\n{len(rows)} runs recorded "
      f"({sum(1 for r in rows if r.method == 'baseline')} baseline)")

assert main([
    "report", "--store", str(root / "runs" / "runs.jsonl"),
    "--out", str(root / "report"), "--curve", "alpha",
]) == 0
print(f"report and curves under {root / 'report'}")
print((root / "report" / "report.tsv").read_text(encoding="utf-8"))
