"""Train/test splits, including seeded few-shot selection.

Few-shot draws are a pure function of (manifest, shots, seed, test_ids):
within each class the eligible ids are ranked by the 64-bit key
``mix(seed, class, id)`` and the `shots` smallest keys win.  Any
implementation of the documented mixer reproduces the same split, so
published splits can also be checked offline.

Split file format:

    shots: 5          (optional)
    seed: 7           (optional)
    train:
    <one id per line>
    test:
    <one id per line>
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

from .errors import SplitError
from .manifest import DatasetManifest
from .seeding import mix


@dataclass(frozen=True)
class SplitSpec:
    train_ids: tuple[int, ...]
    test_ids: tuple[int, ...]
    shots_per_class: int | None = None
    seed: int = 0

    def __post_init__(self):
        overlap = set(self.train_ids) & set(self.test_ids)
        if overlap:
            raise SplitError(f"train/test overlap: {sorted(overlap)[:5]}")
        if len(set(self.train_ids)) != len(self.train_ids):
            raise SplitError("duplicate ids in train set")
        if len(set(self.test_ids)) != len(self.test_ids):
            raise SplitError("duplicate ids in test set")
        if self.shots_per_class is not None and self.shots_per_class < 1:
            raise SplitError(f"shots_per_class must be >= 1, got {self.shots_per_class}")


def make_few_shot_split(
    manifest: DatasetManifest,
    shots: int,
    seed: int,
    test_ids: Iterable[int],
) -> SplitSpec:
    """Select exactly `shots` train ids per class outside `test_ids`."""
    if shots < 1:
        raise SplitError(f"shots must be >= 1, got {shots}")
    test = frozenset(test_ids)
    train: list[int] = []
    for cls in range(manifest.class_count):
        eligible = [i for i in manifest.ids_for_class(cls) if i not in test]
        if len(eligible) < shots:
            raise SplitError(
                f"class {cls} has only {len(eligible)} images outside the test set, "
                f"need {shots}"
            )
        ranked = sorted(eligible, key=lambda i: (mix(seed, cls, i), i))
        train.extend(ranked[:shots])
    return SplitSpec(
        train_ids=tuple(sorted(train)),
        test_ids=tuple(sorted(test)),
        shots_per_class=shots,
        seed=seed,
    )


def make_full_split(manifest: DatasetManifest, test_ids: Iterable[int]) -> SplitSpec:
    """All non-test ids become the train set."""
    test = frozenset(test_ids)
    bad = [i for i in test if not 1 <= i <= manifest.n]
    if bad:
        raise SplitError(f"test ids outside manifest: {sorted(bad)[:5]}")
    train = tuple(i for i in range(1, manifest.n + 1) if i not in test)
    return SplitSpec(train_ids=train, test_ids=tuple(sorted(test)))


def save_split(split: SplitSpec, path: str | Path) -> None:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    lines = []
    if split.shots_per_class is not None:
        lines.append(f"shots: {split.shots_per_class}")
    lines.append(f"seed: {split.seed}")
    lines.append("train:")
    lines += [str(i) for i in split.train_ids]
    lines.append("test:")
    lines += [str(i) for i in split.test_ids]
    p.write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_split(path: str | Path) -> SplitSpec:
    p = Path(path)
    if not p.is_file():
        raise SplitError(f"split file not found: {p}")
    shots: int | None = None
    seed = 0
    section: str | None = None
    ids: dict[str, list[int]] = {"train": [], "test": []}
    for no, raw in enumerate(p.read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line == "train:" or line == "test:":
            section = line[:-1]
            continue
        if line.startswith("shots:"):
            shots = int(line.split(":", 1)[1])
            continue
        if line.startswith("seed:"):
            seed = int(line.split(":", 1)[1])
            continue
        if section is None:
            raise SplitError(f"{p}:{no}: id before any train:/test: section")
        try:
            ids[section].append(int(line))
        except ValueError as e:
            raise SplitError(f"{p}:{no}: not an id: {line!r}") from e
    if not ids["train"] or not ids["test"]:
        raise SplitError(f"{p}: both train: and test: sections must be non-empty")
    return SplitSpec(
        train_ids=tuple(ids["train"]),
        test_ids=tuple(ids["test"]),
        shots_per_class=shots,
        seed=seed,
    )
