"""Small end-to-end study: does mixing plus a bridging stage help?

Three arms, identical inits per seed:
  a) real images only
  b) alpha=0.5 real/synthetic mixing for the whole run
  c) the same mixing, then a shorter second stage on real images only
     (so the classifier head settles on the real distribution)

The corpus trains on near-canonical poses and tests on heavy pose and
lighting variation, which the trajectory provider spans. Expect (b) and
(c) above (a), with (c) on top. Runs in a couple of minutes.
"""

import tempfile
from pathlib import Path

from seqaug.augment import populate_store
from seqaug.manifest import load_manifest
from seqaug.models import build_model
from seqaug.providers import make_provider
from seqaug.sampler import BalancingConfig, plan_epoch
from seqaug.seeding import mix
from seqaug.splits import load_split
from seqaug.toydata import build_toy_dataset, study_trajectory_config
from seqaug.training import DataContext, TrainConfig, build_test_set, run_btl, train_stage
from seqaug.transforms import TransformSpec

SEEDS = (0, 1, 2)

root = Path(tempfile.mkdtemp(prefix="study_"))
manifest_path, split_path = build_toy_dataset(
    root / "data", train_per_class=5, test_per_class=20, size=48, seed=0
)
manifest = load_manifest(manifest_path)
split = load_split(split_path)

provider = make_provider(
    "toy-trajectory", trajectory=study_trajectory_config(), native_resolution=(48, 48)
)
store, _ = populate_store(
    provider, manifest, 1, 16, 17, root / "store",
    image_root=root / "data", ids=split.train_ids,
)

spec = TransformSpec(out_size=32, level="None", scale=(1.0, 1.0), hflip=True)
cfg = TrainConfig(lr0=0.05, weight_decay=1e-4, momentum=0.9, batch_size=16,
                  epochs=31, t0=1, t_mult=2, eval_every_epoch=True)
stage2 = TrainConfig(lr0=0.05, weight_decay=1e-4, momentum=0.9, batch_size=16,
                     epochs=15, t0=1, t_mult=2, eval_every_epoch=True)
test_set = build_test_set(manifest, split.test_ids, root / "data")

real_only = BalancingConfig(alpha=0.0, m=1, k=16)
mixed = BalancingConfig(alpha=0.5, m=1, k=16)


def source(store_, bal, seed):
    def plan(epoch):
        return plan_epoch(split.train_ids, store_, bal, mix(seed, 5, epoch))
    return plan


accs = {"real only": [], "mixed": [], "mixed+bridged": []}
for seed in SEEDS:
    ctx = DataContext(manifest=manifest, image_root=root / "data", store=store)

    model = build_model("cnn-small", 10, 32, mix(7, seed))
    _, res = train_stage(model, source(None, real_only, mix(seed, 1)), cfg, spec, test_set, ctx)
    accs["real only"].append(res.best_accuracy * 100)

    model = build_model("cnn-small", 10, 32, mix(7, seed))
    _, res = train_stage(model, source(store, mixed, mix(seed, 2)), cfg, spec, test_set, ctx)
    accs["mixed"].append(res.best_accuracy * 100)

    model = build_model("cnn-small", 10, 32, mix(7, seed))
    _, _, (_, res2) = run_btl(model, cfg, mixed, store, split, ctx, spec,
                              mix(seed, 3), stage2_cfg=stage2)
    accs["mixed+bridged"].append(res2.best_accuracy * 100)

    print(f"seed {seed}: " + "  ".join(f"{k}={v[-1]:.1f}%" for k, v in accs.items()))

print("\nmeans over seeds:")
for arm, vals in accs.items():
    print(f"  {arm:14s} {sum(vals) / len(vals):5.1f}%")
