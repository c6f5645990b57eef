"""On-disk N x M x K synthetic frame-sequence store.

Layout:

    <root>/meta.json
    <root>/<i:06d>/<j:03d>/<k:03d>.png     frame k of sequence j for image i

Indices are 1-based.  Frames are PNG so put/get round trips are
pixel-exact.  Sequences are written whole (all K frames or nothing),
which lets completeness be tracked per (i, j) in the meta file.  The
meta file is only ever rewritten under an exclusive advisory lock;
distinct sequences may be written concurrently.
"""

from __future__ import annotations

import contextlib
import fcntl
import json
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image

from .errors import StoreError
from .images import load_image, resolution_of, save_png

META_NAME = "meta.json"
_LOCK_NAME = ".meta.lock"


@dataclass
class StoreMeta:
    n: int
    m: int
    k: int
    provider_id: str
    frame_size: tuple[int, int] | None = None  # (width, height), if uniform
    sequence_seeds: dict[tuple[int, int], int] = field(default_factory=dict)
    provider_meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if min(self.n, self.m, self.k) < 1:
            raise StoreError(f"store dimensions must be positive, got N={self.n} M={self.m} K={self.k}")

    def to_json(self) -> str:
        doc = {
            "n": self.n,
            "m": self.m,
            "k": self.k,
            "provider_id": self.provider_id,
            "frame_size": list(self.frame_size) if self.frame_size else None,
            "sequence_seeds": {f"{i}:{j}": s for (i, j), s in sorted(self.sequence_seeds.items())},
            "provider_meta": self.provider_meta,
        }
        return json.dumps(doc, indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "StoreMeta":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as e:
            raise StoreError(f"unreadable store meta: {e}") from e
        if not isinstance(doc, dict) or not {"n", "m", "k"} <= doc.keys():
            raise StoreError("store meta lacks n/m/k dimensions")
        seeds = {}
        for key, s in doc.get("sequence_seeds", {}).items():
            i, _, j = key.partition(":")
            seeds[(int(i), int(j))] = int(s)
        fs = doc.get("frame_size")
        return cls(
            n=int(doc["n"]),
            m=int(doc["m"]),
            k=int(doc["k"]),
            provider_id=str(doc.get("provider_id", "")),
            frame_size=(int(fs[0]), int(fs[1])) if fs else None,
            sequence_seeds=seeds,
            provider_meta=doc.get("provider_meta", {}),
        )


@dataclass
class StoreReport:
    """Outcome of a completeness audit; empty lists mean a complete store."""

    missing: list[tuple[int, int, int]] = field(default_factory=list)
    undecodable: list[tuple[int, int, int]] = field(default_factory=list)
    resolution_mismatches: list[str] = field(default_factory=list)
    generation_failures: list[str] = field(default_factory=list)
    quality_flags: list[str] = field(default_factory=list)  # reserved for future per-frame flags

    @property
    def complete(self) -> bool:
        return not (
            self.missing
            or self.undecodable
            or self.resolution_mismatches
            or self.generation_failures
        )

    def summary(self) -> str:
        if self.complete:
            return "store complete"
        lines = []
        if self.missing:
            lines.append(f"{len(self.missing)} missing frame(s): " + ", ".join(
                f"({i},{j},{k})" for i, j, k in self.missing[:8]))
        if self.undecodable:
            lines.append(f"{len(self.undecodable)} undecodable frame(s): " + ", ".join(
                f"({i},{j},{k})" for i, j, k in self.undecodable[:8]))
        lines.extend(self.resolution_mismatches[:8])
        lines.extend(self.generation_failures[:8])
        return "\n".join(lines)


class SequenceStore:
    """Addressable (i, j, k) -> frame storage rooted at a directory."""

    def __init__(self, root: str | Path, meta: StoreMeta):
        self.root = Path(root)
        self.meta = meta

    # -- construction -------------------------------------------------

    @classmethod
    def create(
        cls,
        root: str | Path,
        n: int,
        m: int,
        k: int,
        provider_id: str,
        frame_size: tuple[int, int] | None = None,
        provider_meta: dict | None = None,
    ) -> "SequenceStore":
        rootp = Path(root)
        meta_path = rootp / META_NAME
        if meta_path.exists():
            raise StoreError(f"store already exists at {rootp}")
        try:
            rootp.mkdir(parents=True, exist_ok=True)
        except OSError as e:
            raise StoreError(f"cannot create store root {rootp}: {e}") from e
        store = cls(rootp, StoreMeta(n, m, k, provider_id, frame_size, {}, provider_meta or {}))
        store._write_meta()
        return store

    @classmethod
    def open(cls, root: str | Path) -> "SequenceStore":
        rootp = Path(root)
        meta_path = rootp / META_NAME
        if not meta_path.is_file():
            raise StoreError(f"no {META_NAME} under {rootp}; not a sequence store")
        return cls(rootp, StoreMeta.from_json(meta_path.read_text(encoding="utf-8")))

    # -- meta ----------------------------------------------------------

    @property
    def n(self) -> int:
        return self.meta.n

    @property
    def m(self) -> int:
        return self.meta.m

    @property
    def k(self) -> int:
        return self.meta.k

    @contextlib.contextmanager
    def _meta_lock(self):
        lock_path = self.root / _LOCK_NAME
        fd = os.open(lock_path, os.O_RDWR | os.O_CREAT, 0o644)
        try:
            fcntl.flock(fd, fcntl.LOCK_EX)
            yield
        finally:
            fcntl.flock(fd, fcntl.LOCK_UN)
            os.close(fd)

    def _write_meta(self) -> None:
        tmp = self.root / (META_NAME + ".tmp")
        tmp.write_text(self.meta.to_json(), encoding="utf-8")
        tmp.replace(self.root / META_NAME)

    def mark_sequences(self, seeds: dict[tuple[int, int], int]) -> None:
        """Record sequences as fully written (read-modify-write under the lock)."""
        with self._meta_lock():
            current = StoreMeta.from_json((self.root / META_NAME).read_text(encoding="utf-8"))
            current.sequence_seeds.update(seeds)
            self.meta = current
            self._write_meta()

    # -- addressing ----------------------------------------------------

    def frame_path(self, i: int, j: int, k: int) -> Path:
        return self.root / f"{i:06d}" / f"{j:03d}" / f"{k:03d}.png"

    def _check_bounds(self, i: int, j: int, k: int | None = None) -> None:
        if not 1 <= i <= self.n:
            raise StoreError(f"image index {i} outside 1..{self.n}")
        if not 1 <= j <= self.m:
            raise StoreError(f"sequence index {j} outside 1..{self.m}")
        if k is not None and not 1 <= k <= self.k:
            raise StoreError(f"frame index {k} outside 1..{self.k}")

    # -- frame access ----------------------------------------------------

    def put_sequence(
        self, i: int, j: int, frames: list[np.ndarray], seed: int | None = None
    ) -> None:
        """Write all K frames of sequence (i, j) and record its seed."""
        self._check_bounds(i, j)
        if len(frames) != self.k:
            raise StoreError(
                f"frame count mismatch for ({i},{j}): got {len(frames)}, store K={self.k}"
            )
        sizes = {resolution_of(f) for f in frames}
        if len(sizes) != 1:
            raise StoreError(f"frames for ({i},{j}) differ in resolution: {sorted(sizes)}")
        for k, frame in enumerate(frames, start=1):
            save_png(frame, self.frame_path(i, j, k))
        self.mark_sequences({(i, j): 0 if seed is None else seed})

    def get_frame(self, i: int, j: int, k: int) -> np.ndarray:
        self._check_bounds(i, j, k)
        path = self.frame_path(i, j, k)
        if not path.is_file():
            raise StoreError(f"missing frame ({i},{j},{k}) at {path}")
        return load_image(path)

    def has_frame(self, i: int, j: int, k: int) -> bool:
        return self.frame_path(i, j, k).is_file()

    def missing_sequences(self, ids: list[int] | None = None, m: int | None = None) -> list[tuple[int, int]]:
        """Sequences not recorded in meta, per the whole-sequence write discipline."""
        ids = ids if ids is not None else list(range(1, self.n + 1))
        m = m if m is not None else self.m
        seeds = self.meta.sequence_seeds
        return [(i, j) for i in ids for j in range(1, m + 1) if (i, j) not in seeds]


def validate_store(store: SequenceStore, decode: bool = True) -> StoreReport:
    """Full audit: every (i,j,k) present, decodable, resolution-consistent.

    Problems are report entries, never exceptions; an empty report is the
    definition of a complete store.
    """
    report = StoreReport()
    declared = store.meta.frame_size
    for i in range(1, store.n + 1):
        for j in range(1, store.m + 1):
            seq_size: tuple[int, int] | None = None
            for k in range(1, store.k + 1):
                path = store.frame_path(i, j, k)
                if not path.is_file():
                    report.missing.append((i, j, k))
                    continue
                if not decode:
                    continue
                try:
                    with Image.open(path) as img:
                        img.load()
                        size = img.size
                except Exception:
                    report.undecodable.append((i, j, k))
                    continue
                if seq_size is None:
                    seq_size = size
                elif size != seq_size:
                    report.resolution_mismatches.append(
                        f"sequence ({i},{j}): frame {k} is {size[0]}x{size[1]}, "
                        f"expected {seq_size[0]}x{seq_size[1]}"
                    )
            if declared and seq_size and seq_size != tuple(declared):
                report.resolution_mismatches.append(
                    f"sequence ({i},{j}): resolution {seq_size[0]}x{seq_size[1]} "
                    f"differs from store's declared {declared[0]}x{declared[1]}"
                )
    return report
