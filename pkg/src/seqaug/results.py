"""Run records, the append-only run store, and improvement aggregation.

Accuracies arrive as percentages printed to one decimal, so improvement
arithmetic runs on Decimal: binary floats round mean{1.6, 0.2, 0.1, 0.0}
to 0.47 while the correct half-up value is 0.48.  Summary cells are
quantized to 2 decimals, ties away from zero.

The run store is one JSON record per line, append-only, serialized by
an exclusive lock on a sidecar file.  Re-running a configuration with
--force appends a replacement record; loaders keep the last record per
key, so the file itself is never rewritten.
"""

from __future__ import annotations

import fcntl
import json
from contextlib import contextmanager
from dataclasses import asdict, dataclass
from decimal import ROUND_HALF_UP, Decimal
from pathlib import Path
from typing import Iterable, Sequence

from .errors import ResultsError

METHODS = ("baseline", "GIA", "SGIA")
SHOTS_REGIMES = ("1", "5", "full")

_CENT = Decimal("0.01")

# fields that identify a run; a second record with the same key replaces the first
KEY_FIELDS = (
    "dataset",
    "backbone",
    "base_aug",
    "image_size",
    "method",
    "alpha",
    "m",
    "shots",
    "seed",
    "btl",
)


@dataclass(frozen=True)
class RunRecord:
    """Outcome of one training run under one configuration key."""

    dataset: str
    backbone: str
    base_aug: str
    image_size: int
    method: str
    alpha: float
    m: int
    shots: str
    seed: int
    best_accuracy: float
    btl: bool = False
    results_path: str = ""

    def __post_init__(self):
        if self.method not in METHODS:
            raise ResultsError(f"method must be one of {METHODS}, got {self.method!r}")
        if self.shots not in SHOTS_REGIMES:
            raise ResultsError(f"shots must be one of {SHOTS_REGIMES}, got {self.shots!r}")
        if not 0.0 <= self.best_accuracy <= 100.0:
            raise ResultsError(f"best_accuracy must be a percent in [0, 100], got {self.best_accuracy}")
        if not 0.0 <= self.alpha <= 1.0:
            raise ResultsError(f"alpha must be in [0, 1], got {self.alpha}")
        if self.m < 1 or self.image_size < 1:
            raise ResultsError(f"m and image_size must be >= 1, got m={self.m} size={self.image_size}")

    @property
    def key(self) -> tuple:
        return tuple(getattr(self, f) for f in KEY_FIELDS)


# -- run store ----------------------------------------------------------------


@contextmanager
def _store_lock(path: Path):
    lock = path.with_name(path.name + ".lock")
    lock.parent.mkdir(parents=True, exist_ok=True)
    with open(lock, "w") as fh:
        fcntl.flock(fh, fcntl.LOCK_EX)
        try:
            yield
        finally:
            fcntl.flock(fh, fcntl.LOCK_UN)


def append_run(path: str | Path, record: RunRecord) -> None:
    """Append one record under the writer lock."""
    p = Path(path)
    with _store_lock(p):
        with open(p, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(asdict(record), sort_keys=True) + "\n")


def load_runs(path: str | Path) -> list[RunRecord]:
    """Read the store; the last record per key wins."""
    p = Path(path)
    if not p.is_file():
        return []
    by_key: dict[tuple, RunRecord] = {}
    for no, line in enumerate(p.read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        try:
            rec = RunRecord(**json.loads(line))
        except (json.JSONDecodeError, TypeError) as exc:
            raise ResultsError(f"{p}:{no}: bad run record: {exc}") from exc
        by_key[rec.key] = rec
    return list(by_key.values())


def completed_keys(path: str | Path) -> set[tuple]:
    return {rec.key for rec in load_runs(path)}


# -- aggregation --------------------------------------------------------------


@dataclass(frozen=True)
class ResultsTable:
    rows: tuple[RunRecord, ...]

    @classmethod
    def from_store(cls, path: str | Path) -> "ResultsTable":
        return cls(rows=tuple(load_runs(path)))

    def filter(self, **criteria) -> "ResultsTable":
        rows = [
            r for r in self.rows if all(getattr(r, field) == want for field, want in criteria.items())
        ]
        return ResultsTable(rows=tuple(rows))

    def __len__(self) -> int:
        return len(self.rows)


@dataclass(frozen=True)
class SummaryRow:
    method: str
    group: tuple[tuple[str, object], ...]
    count: int
    mean_improvement: Decimal


def _dec(x: float) -> Decimal:
    return Decimal(str(x))


def round2(d: Decimal) -> Decimal:
    return d.quantize(_CENT, rounding=ROUND_HALF_UP)


def improvement(method_acc: float, baseline_acc: float) -> Decimal:
    """Accuracy delta against the matched baseline, in exact decimal."""
    return _dec(method_acc) - _dec(baseline_acc)


def _baseline_key(rec: RunRecord) -> tuple:
    return (rec.dataset, rec.backbone, rec.base_aug, rec.image_size, rec.shots, rec.seed)


def pair_with_baselines(table: ResultsTable, method: str) -> list[tuple[RunRecord, Decimal]]:
    """Each `method` row paired with its improvement over the matching baseline.

    A baseline matches on everything except method, alpha, and M.
    """
    baselines = {}
    for rec in table.rows:
        if rec.method == "baseline":
            baselines[_baseline_key(rec)] = rec
    out = []
    for rec in table.rows:
        if rec.method != method:
            continue
        base = baselines.get(_baseline_key(rec))
        if base is None:
            raise ResultsError(f"no baseline row for configuration {_baseline_key(rec)}")
        out.append((rec, improvement(rec.best_accuracy, base.best_accuracy)))
    return out


def aggregate_improvements(
    table: ResultsTable,
    group_by: Sequence[str] = (),
    methods: Iterable[str] = ("GIA", "SGIA"),
) -> tuple[list[SummaryRow], list[str]]:
    """Mean improvement per method per group, quantized to 2 decimals.

    Returns (summary rows, warnings); a method with no rows yields a
    warning instead of a summary row.
    """
    rows: list[SummaryRow] = []
    warnings: list[str] = []
    for method in methods:
        if method == "baseline":
            raise ResultsError("baseline is the reference, not an aggregable method")
        paired = pair_with_baselines(table, method)
        if not paired:
            warnings.append(f"no rows for method {method}; group omitted")
            continue
        groups: dict[tuple, list[Decimal]] = {}
        for rec, delta in paired:
            key = tuple((field, getattr(rec, field)) for field in group_by)
            groups.setdefault(key, []).append(delta)
        for key in sorted(groups, key=repr):
            deltas = groups[key]
            mean = sum(deltas) / Decimal(len(deltas))
            rows.append(
                SummaryRow(method=method, group=key, count=len(deltas), mean_improvement=round2(mean))
            )
    return rows, warnings


def mean_accuracy(rows: Iterable[RunRecord]) -> Decimal:
    """Seed-mean of best accuracies, quantized to 2 decimals."""
    accs = [_dec(r.best_accuracy) for r in rows]
    if not accs:
        raise ResultsError("mean over no rows")
    return round2(sum(accs) / Decimal(len(accs)))
