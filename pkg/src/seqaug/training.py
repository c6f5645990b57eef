"""Fine-tuning stages and the two-stage bridging protocol.

A stage consumes one epoch plan per epoch, materializes each slot (real
image or synthetic frame) through the train transform, and runs SGD with
the warm-restart cosine schedule.  Bridging runs two stages: first on
the mixed real/synthetic loader, then on real data only, so the final
model never sees a synthetic sample in its last stage.  The two-step
variant trains only the head in step 1, then the full network on real
data.

Determinism: all data-side randomness is derived from the epoch plan's
seed (per-slot transform streams), and weight updates are plain numpy,
so a stage rerun with the same inputs reproduces its metric stream
exactly.  Decoded images are cached unbounded; fine at desk scale.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .errors import ConfigError, TrainingDiverged
from .manifest import DatasetManifest
from .images import load_image
from .models import ModelHandle
from .sampler import BalancingConfig, EpochPlan, SampleRef, empirical_alpha, plan_epoch
from .schedule import CosineRestarts
from .seeding import SplitMix64, mix
from .splits import SplitSpec
from .store import SequenceStore
from .transforms import TransformSpec, test_transform, train_transform

_TAG_AUG = 3
_TAG_STAGE1 = 11
_TAG_STAGE2 = 12

_EVAL_BATCH = 64


@dataclass(frozen=True)
class TrainConfig:
    """Optimizer and schedule settings for one training stage."""

    lr0: float = 0.01
    weight_decay: float = 1e-5
    momentum: float = 0.9
    batch_size: int = 16
    epochs: int = 128
    t0: int = 1
    t_mult: int = 2
    eval_every_epoch: bool = True

    def __post_init__(self):
        if self.lr0 <= 0:
            raise ConfigError(f"lr0 must be positive, got {self.lr0}")
        if self.weight_decay < 0 or not 0 <= self.momentum < 1:
            raise ConfigError("weight_decay must be >= 0 and momentum in [0, 1)")
        if self.batch_size < 1:
            raise ConfigError(f"batch_size must be >= 1, got {self.batch_size}")
        # epochs 0 is allowed so a stage override can skip a stage entirely
        if self.epochs < 0:
            raise ConfigError(f"epochs must be >= 0, got {self.epochs}")

    @property
    def schedule(self) -> CosineRestarts:
        return CosineRestarts(lr0=self.lr0, t0=self.t0, t_mult=self.t_mult)


@dataclass(frozen=True)
class EpochMetrics:
    epoch: int
    train_loss: float
    test_accuracy: float | None
    lr: float


@dataclass(frozen=True)
class StageResult:
    epochs: tuple[EpochMetrics, ...]
    wall_time: float

    @property
    def best_accuracy(self) -> float:
        scores = [e.test_accuracy for e in self.epochs if e.test_accuracy is not None]
        if not scores:
            raise ConfigError("stage recorded no evaluations")
        return max(scores)

    @property
    def best_epoch(self) -> int:
        best = self.best_accuracy
        for e in self.epochs:
            if e.test_accuracy == best:
                return e.epoch
        raise AssertionError("unreachable")


def save_stage_result(result: StageResult, path: str | Path) -> None:
    """One JSON record per epoch, then a wall-time footer line."""
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    lines = [
        json.dumps(
            {
                "epoch": e.epoch,
                "train_loss": e.train_loss,
                "test_accuracy": e.test_accuracy,
                "lr": e.lr,
            },
            sort_keys=True,
        )
        for e in result.epochs
    ]
    lines.append(json.dumps({"wall_time": result.wall_time}))
    p.write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_stage_result(path: str | Path) -> StageResult:
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"stage result file not found: {p}")
    epochs: list[EpochMetrics] = []
    wall_time = 0.0
    for line in p.read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        rec = json.loads(line)
        if "wall_time" in rec:
            wall_time = float(rec["wall_time"])
            continue
        epochs.append(
            EpochMetrics(
                epoch=int(rec["epoch"]),
                train_loss=float(rec["train_loss"]),
                test_accuracy=None if rec["test_accuracy"] is None else float(rec["test_accuracy"]),
                lr=float(rec["lr"]),
            )
        )
    return StageResult(epochs=tuple(epochs), wall_time=wall_time)


# -- data plumbing ------------------------------------------------------------


@dataclass
class DataContext:
    """Resolves plan refs to pixels; caches decodes for repeat epochs."""

    manifest: DatasetManifest
    image_root: Path | None = None
    store: SequenceStore | None = None
    _real: dict = field(default_factory=dict, repr=False)
    _synth: dict = field(default_factory=dict, repr=False)

    def pixels(self, ref: SampleRef) -> np.ndarray:
        if ref.kind == "real":
            arr = self._real.get(ref.i)
            if arr is None:
                arr = load_image(self.manifest.resolve_path(ref.i, self.image_root))
                self._real[ref.i] = arr
            return arr
        if self.store is None:
            raise ConfigError("plan contains synthetic refs but no store is attached")
        key = (ref.i, ref.j, ref.k)
        arr = self._synth.get(key)
        if arr is None:
            arr = self.store.get_frame(*key)
            self._synth[key] = arr
        return arr

    def label(self, ref: SampleRef) -> int:
        # synthetic frames inherit the source image's label
        return self.manifest.label_of(ref.i)


def _to_input(batch: list[np.ndarray]) -> np.ndarray:
    x = np.stack(batch).astype(np.float32) / 255.0
    return np.ascontiguousarray(((x - 0.5) / 0.5).transpose(0, 3, 1, 2))


def build_test_set(
    manifest: DatasetManifest, ids: Sequence[int], image_root: Path | None = None
) -> list[tuple[Path, int]]:
    return [(manifest.resolve_path(i, image_root), manifest.label_of(i)) for i in ids]


def _load_pair(source) -> np.ndarray:
    return source if isinstance(source, np.ndarray) else load_image(source)


def evaluate(model: ModelHandle, test_set, transforms: TransformSpec) -> float:
    """Top-1 accuracy under the deterministic test transform."""
    pairs = list(test_set)
    if not pairs:
        raise ConfigError("empty test set")
    tensors = [test_transform(_load_pair(p), transforms) for p, _ in pairs]
    labels = np.array([label for _, label in pairs], dtype=np.int64)
    return _accuracy(model, _to_input(tensors), labels)


def _accuracy(model: ModelHandle, x: np.ndarray, labels: np.ndarray) -> float:
    hits = 0
    for lo in range(0, len(labels), _EVAL_BATCH):
        logits = model.forward(x[lo : lo + _EVAL_BATCH])
        hits += int((logits.argmax(axis=1) == labels[lo : lo + _EVAL_BATCH]).sum())
    return hits / len(labels)


# -- stage loop ---------------------------------------------------------------


def train_stage(
    model: ModelHandle,
    plan_source: Callable[[int], EpochPlan],
    cfg: TrainConfig,
    transforms: TransformSpec,
    test_set,
    ctx: DataContext,
) -> tuple[ModelHandle, StageResult]:
    """Run cfg.epochs epochs of SGD over per-epoch plans; mutates `model`.

    Aborts with stage diagnostics as soon as a non-finite loss appears.
    """
    started = time.monotonic()
    schedule = cfg.schedule
    velocity = {name: np.zeros_like(arr) for name, arr in model.parameters().items()}
    trainable = set(model.trainable_names())

    test_x = test_y = None
    if test_set is not None:
        pairs = list(test_set)
        if pairs:
            tensors = [test_transform(_load_pair(p), transforms) for p, _ in pairs]
            test_x = _to_input(tensors)
            test_y = np.array([label for _, label in pairs], dtype=np.int64)

    metrics: list[EpochMetrics] = []
    for epoch in range(cfg.epochs):
        plan = plan_source(epoch)
        lr = schedule.epoch_lr(epoch)
        losses: list[float] = []
        for lo in range(0, len(plan.slots), cfg.batch_size):
            refs = plan.slots[lo : lo + cfg.batch_size]
            batch = []
            for offset, ref in enumerate(refs):
                rng = SplitMix64(mix(plan.seed, _TAG_AUG, lo + offset))
                batch.append(train_transform(ctx.pixels(ref), transforms, rng))
            x = _to_input(batch)
            y = np.array([ctx.label(ref) for ref in refs], dtype=np.int64)
            loss, _, grads = model.loss_and_grads(x, y)
            if not np.isfinite(loss):
                raise TrainingDiverged(
                    f"non-finite loss {loss} at epoch {epoch} step {lo // cfg.batch_size}",
                    epoch=epoch,
                    step=lo // cfg.batch_size,
                    last_lr=lr,
                )
            losses.append(loss)
            params = model.parameters()
            for name in trainable:
                g = grads[name] + np.float32(cfg.weight_decay) * params[name]
                velocity[name] = np.float32(cfg.momentum) * velocity[name] + g
                params[name] -= np.float32(lr) * velocity[name]

        acc = None
        if test_x is not None and (cfg.eval_every_epoch or epoch == cfg.epochs - 1):
            acc = _accuracy(model, test_x, test_y)
        metrics.append(
            EpochMetrics(
                epoch=epoch,
                train_loss=float(np.mean(losses)) if losses else 0.0,
                test_accuracy=acc,
                lr=lr,
            )
        )
    return model, StageResult(epochs=tuple(metrics), wall_time=time.monotonic() - started)


def _plan_source(
    split: SplitSpec, store: SequenceStore | None, cfg: BalancingConfig, seed: int, stage_tag: int
) -> Callable[[int], EpochPlan]:
    def source(epoch: int) -> EpochPlan:
        return plan_epoch(split.train_ids, store, cfg, mix(seed, stage_tag, epoch))

    return source


def run_btl(
    model_pre: ModelHandle,
    cfg: TrainConfig,
    alpha_cfg: BalancingConfig,
    store: SequenceStore | None,
    split: SplitSpec,
    ctx: DataContext,
    transforms: TransformSpec,
    seed: int,
    stage2_cfg: TrainConfig | None = None,
) -> tuple[ModelHandle, ModelHandle, tuple[StageResult, StageResult]]:
    """Bridging transfer: stage 1 on the mixed loader, stage 2 on real only.

    `model_pre` is left untouched; returns (bridged model, final model,
    both stage results).  Stage 2 runs with alpha forced to 0 against a
    store-free context, so it cannot reference synthetic data even by
    accident.
    """
    test_set = build_test_set(ctx.manifest, split.test_ids, ctx.image_root)

    m_brg = model_pre.clone()
    source1 = _plan_source(split, store, alpha_cfg, seed, _TAG_STAGE1)
    m_brg, res1 = train_stage(m_brg, source1, cfg, transforms, test_set, ctx)

    zero = BalancingConfig(alpha=0.0, m=alpha_cfg.m, k=alpha_cfg.k, mode=alpha_cfg.mode)
    ctx0 = DataContext(manifest=ctx.manifest, image_root=ctx.image_root, store=None)
    ctx0._real = ctx._real  # share the decode cache; stage 2 is real-only
    source2 = _plan_source(split, None, zero, seed, _TAG_STAGE2)

    def audited_source2(epoch: int) -> EpochPlan:
        plan = source2(epoch)
        assert empirical_alpha(plan) == 0.0
        return plan

    m_cls = m_brg.clone()
    m_cls, res2 = train_stage(
        m_cls, audited_source2, stage2_cfg or cfg, transforms, test_set, ctx0
    )
    return m_brg, m_cls, (res1, res2)


def run_two_step(
    model_pre: ModelHandle,
    cfg: TrainConfig,
    alpha_cfg: BalancingConfig,
    store: SequenceStore | None,
    split: SplitSpec,
    ctx: DataContext,
    transforms: TransformSpec,
    seed: int,
    stage2_cfg: TrainConfig | None = None,
) -> tuple[ModelHandle, ModelHandle, tuple[StageResult, StageResult]]:
    """Head-only warmup on the mixed loader, then full fine-tune on real data.

    Same shape as run_btl; step 1 updates only head parameters, so the
    backbone stays bit-identical to `model_pre` until step 2.
    """
    test_set = build_test_set(ctx.manifest, split.test_ids, ctx.image_root)

    m_head = model_pre.clone(trainable_scope="head-only")
    source1 = _plan_source(split, store, alpha_cfg, seed, _TAG_STAGE1)
    m_head, res1 = train_stage(m_head, source1, cfg, transforms, test_set, ctx)

    zero = BalancingConfig(alpha=0.0, m=alpha_cfg.m, k=alpha_cfg.k, mode=alpha_cfg.mode)
    ctx0 = DataContext(manifest=ctx.manifest, image_root=ctx.image_root, store=None)
    ctx0._real = ctx._real
    source2 = _plan_source(split, None, zero, seed, _TAG_STAGE2)

    m_full = m_head.clone(trainable_scope="full")
    m_full, res2 = train_stage(m_full, source2, stage2_cfg or cfg, transforms, test_set, ctx0)
    return m_head, m_full, (res1, res2)
