"""Real/synthetic balancing sampler.

An epoch plan fixes, slot by slot, whether training sees the real image
or a uniformly drawn synthetic frame.  Each slot flips a Bernoulli coin
with probability ``alpha`` for the synthetic branch and, when synthetic,
draws sequence and frame indices uniformly.

Two modes:

* ``epoch-permutation`` (default): slots are a seeded permutation of the
  train ids, so every id is visited exactly once per epoch and only the
  real-vs-synthetic substitution is random per slot.
* ``fully-uniform``: the image id itself is drawn uniformly per slot
  (with replacement); slot count still equals the train set size.

All slot randomness is keyed by ``mix(seed, _TAG_SLOT, slot_index)`` and
every slot consumes the same number of draws whichever branch it takes,
so plans are order-independent, parallel-safe, and bit-reproducible.

Plans serialize to a line-oriented audit file: ``slot_index kind i [j k]``.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy import stats

from .errors import ConfigError, SplitError, StoreError
from .seeding import (
    GOLDEN,
    MASK64,
    _finalize_np,
    hash_u64,
    mix,
    splitmix64,
    unit_from_u64,
)
from .store import SequenceStore

MODES = ("epoch-permutation", "fully-uniform")

_TAG_PERM = 1
_TAG_SLOT = 2

# fixed draw positions within a slot's stream (consumed implicitly by position,
# so both modes and both branches advance identically)
_DRAW_PICK = 0   # image id selection (fully-uniform mode only)
_DRAW_COIN = 1   # real-vs-synthetic Bernoulli
_DRAW_SEQ = 2    # sequence index j
_DRAW_FRAME = 3  # frame index k
_DRAWS_PER_SLOT = 4


@dataclass(frozen=True, slots=True)
class BalancingConfig:
    """Mixing rate and synthetic-store geometry for one loader."""

    alpha: float = 0.5
    m: int = 1
    k: int = 32
    mode: str = "epoch-permutation"

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ConfigError(f"alpha must be in [0, 1], got {self.alpha}")
        if self.m < 1 or self.k < 1:
            raise ConfigError(f"M and K must be >= 1, got M={self.m} K={self.k}")
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")


@dataclass(frozen=True, slots=True)
class SampleRef:
    """One training slot: the real image i, or synthetic frame (i, j, k)."""

    kind: str  # "real" | "synthetic"
    i: int
    j: int | None = None
    k: int | None = None

    def __post_init__(self):
        if self.kind == "real":
            if self.j is not None or self.k is not None:
                raise ConfigError("real refs carry no (j, k)")
        elif self.kind == "synthetic":
            if self.j is None or self.k is None:
                raise ConfigError("synthetic refs need (j, k)")
        else:
            raise ConfigError(f"kind must be real|synthetic, got {self.kind!r}")


@dataclass(frozen=True, slots=True)
class EpochPlan:
    slots: tuple[SampleRef, ...]
    seed: int
    config: BalancingConfig

    def __len__(self) -> int:
        return len(self.slots)


def slot_state(seed: int, slot_index: int) -> int:
    """Root of slot `slot_index`'s private draw stream for a plan seeded `seed`."""
    return mix(seed, _TAG_SLOT, slot_index)


def _slot_draw(state: int, position: int) -> float:
    """Scalar unit draw at a fixed position of a slot stream."""
    return (splitmix64((state + (position + 1) * GOLDEN) & MASK64) >> 11) * 2.0**-53


def sample_slot(i: int, cfg: BalancingConfig, slot_rng_state: int) -> SampleRef:
    """Resolve one slot for image id `i` from its stream root.

    Always consumes the same draw positions regardless of outcome.
    """
    coin = _slot_draw(slot_rng_state, _DRAW_COIN)
    if coin < cfg.alpha:
        j = 1 + int(_slot_draw(slot_rng_state, _DRAW_SEQ) * cfg.m)
        k = 1 + int(_slot_draw(slot_rng_state, _DRAW_FRAME) * cfg.k)
        return SampleRef(kind="synthetic", i=i, j=j, k=k)
    return SampleRef(kind="real", i=i)


def _check_store(train_ids: Sequence[int], store: SequenceStore | None, cfg: BalancingConfig):
    if store is None:
        raise ConfigError("alpha > 0 requires a sequence store")
    if cfg.k != store.k:
        raise ConfigError(f"config K={cfg.k} must equal store K={store.k}")
    if cfg.m > store.m:
        raise ConfigError(f"config M={cfg.m} exceeds store M={store.m}")
    if max(train_ids) > store.n:
        raise ConfigError(f"train id {max(train_ids)} exceeds store N={store.n}")
    missing = store.missing_sequences(list(train_ids), cfg.m)
    if missing:
        head = ", ".join(f"({i},{j})" for i, j in missing[:5])
        raise StoreError(
            f"store incomplete for {len(missing)} train sequence(s), e.g. {head}; "
            f"run validate_store for a full report"
        )


def draw_slots(seed: int, n_slots: int, cfg: BalancingConfig):
    """Vectorized per-slot draws: (pick, synthetic, j, k) arrays.

    `pick` is the unit draw reserved for fully-uniform id selection;
    element s of each array reproduces sample_slot under
    slot_state(seed, s) exactly, draw position for draw position.
    """
    base = np.uint64(mix(seed, _TAG_SLOT))
    with np.errstate(over="ignore"):
        # == slot_state(seed, s) for every slot s at once
        states = _finalize_np(base + np.arange(n_slots, dtype=np.uint64))

    def draw_at(position: int) -> np.ndarray:
        offset = np.uint64(((position + 1) * GOLDEN) & MASK64)
        with np.errstate(over="ignore"):
            return unit_from_u64(_finalize_np(states + offset))

    pick = draw_at(_DRAW_PICK)
    synthetic = draw_at(_DRAW_COIN) < cfg.alpha
    jj = 1 + (draw_at(_DRAW_SEQ) * cfg.m).astype(np.int64)
    kk = 1 + (draw_at(_DRAW_FRAME) * cfg.k).astype(np.int64)
    return pick, synthetic, jj, kk


def plan_epoch(
    train_ids: Sequence[int],
    store: SequenceStore | None,
    cfg: BalancingConfig,
    seed: int,
) -> EpochPlan:
    """Materialize the per-slot schedule for one epoch.

    Pure function of its inputs.  With alpha > 0 the attached store must
    resolve every possible synthetic ref for the train ids.
    """
    ids = sorted(set(int(i) for i in train_ids))
    if not ids:
        raise SplitError("empty train id set")
    if len(ids) != len(train_ids):
        raise SplitError("duplicate train ids")
    if cfg.alpha > 0.0:
        _check_store(ids, store, cfg)

    n_slots = len(ids)
    ids_arr = np.asarray(ids, dtype=np.int64)
    pick, synthetic, jj, kk = draw_slots(seed, n_slots, cfg)

    if cfg.mode == "epoch-permutation":
        perm_keys = hash_u64(mix(seed, _TAG_PERM), ids_arr.astype(np.uint64))
        order = np.lexsort((ids_arr, perm_keys))
        slot_i = ids_arr[order]
    else:
        slot_i = ids_arr[(pick * n_slots).astype(np.int64)]

    slots = tuple(
        SampleRef(kind="synthetic", i=int(slot_i[s]), j=int(jj[s]), k=int(kk[s]))
        if synthetic[s]
        else SampleRef(kind="real", i=int(slot_i[s]))
        for s in range(n_slots)
    )
    return EpochPlan(slots=slots, seed=seed, config=cfg)


def empirical_alpha(plan: EpochPlan) -> float:
    """Observed synthetic fraction of a plan."""
    if not plan.slots:
        raise ConfigError("empty plan")
    synthetic = sum(1 for ref in plan.slots if ref.kind == "synthetic")
    return synthetic / len(plan.slots)


def uniformity_chisq(jj: np.ndarray, kk: np.ndarray, m: int, k: int) -> tuple[float, int, float]:
    """Chi-square goodness of fit of (j, k) draws against uniform on {1..M}x{1..K}.

    Returns (statistic, degrees of freedom, p-value).
    """
    jj = np.asarray(jj, dtype=np.int64)
    kk = np.asarray(kk, dtype=np.int64)
    if jj.size == 0 or jj.size != kk.size:
        raise ConfigError("need matching non-empty j and k draws")
    cells = (jj - 1) * k + (kk - 1)
    n_cells = m * k
    observed = np.bincount(cells, minlength=n_cells).astype(np.float64)
    expected = cells.size / n_cells
    stat = float(((observed - expected) ** 2 / expected).sum())
    dof = n_cells - 1
    pvalue = float(stats.chi2.sf(stat, dof))
    return stat, dof, pvalue


def plan_uniformity_chisq(plan: EpochPlan) -> tuple[float, int, float]:
    """Uniformity audit over a plan's synthetic slots."""
    refs = [ref for ref in plan.slots if ref.kind == "synthetic"]
    if not refs:
        raise ConfigError("plan has no synthetic slots to audit")
    jj = np.array([ref.j for ref in refs], dtype=np.int64)
    kk = np.array([ref.k for ref in refs], dtype=np.int64)
    return uniformity_chisq(jj, kk, plan.config.m, plan.config.k)


# -- audit file -------------------------------------------------------------


def save_plan(plan: EpochPlan, path: str | Path) -> None:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    cfg = plan.config
    lines = [f"# seed={plan.seed} alpha={cfg.alpha} m={cfg.m} k={cfg.k} mode={cfg.mode}"]
    for s, ref in enumerate(plan.slots):
        if ref.kind == "real":
            lines.append(f"{s} real {ref.i}")
        else:
            lines.append(f"{s} synthetic {ref.i} {ref.j} {ref.k}")
    p.write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_plan(path: str | Path) -> EpochPlan:
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"plan file not found: {p}")
    lines = p.read_text(encoding="utf-8").splitlines()
    if not lines or not lines[0].startswith("#"):
        raise ConfigError(f"{p}: missing plan header line")
    header = dict(tok.split("=", 1) for tok in lines[0][1:].split())
    cfg = BalancingConfig(
        alpha=float(header["alpha"]), m=int(header["m"]), k=int(header["k"]), mode=header["mode"]
    )
    slots = []
    for no, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        fields = line.split()
        if fields[1] == "real":
            slots.append(SampleRef(kind="real", i=int(fields[2])))
        elif fields[1] == "synthetic":
            slots.append(
                SampleRef(kind="synthetic", i=int(fields[2]), j=int(fields[3]), k=int(fields[4]))
            )
        else:
            raise ConfigError(f"{p}:{no}: bad slot kind {fields[1]!r}")
    return EpochPlan(slots=tuple(slots), seed=int(header["seed"]), config=cfg)
