"""Store population and ingestion of precomputed frame dumps.

``populate_store`` drives a provider over every (image, sequence) cell.
Each sequence gets its own seed via ``sequence_seed(base_seed, i, j)``,
so cells are order-independent, safe to generate concurrently, and any
subset can be regenerated bit-identically on its own.

``ingest_precomputed`` adopts frames produced elsewhere, either already
in store layout or located through a mapping file whose lines read
``<source-path> <i> <j> <k>``.
"""

from __future__ import annotations

import shutil
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Sequence

from .errors import IngestError, ProviderError, StoreError
from .images import load_image, save_png
from .manifest import DatasetManifest
from .providers import GenerationProvider, generate_sequence
from .seeding import sequence_seed
from .store import META_NAME, SequenceStore, StoreReport, validate_store

MAPPING_NAME = "mapping.txt"


def populate_store(
    provider: GenerationProvider,
    manifest: DatasetManifest,
    m: int,
    k: int,
    base_seed: int,
    root: str | Path,
    image_root: str | Path | None = None,
    workers: int = 1,
    ids: Sequence[int] | None = None,
) -> tuple[SequenceStore, StoreReport]:
    """Generate the N x M x K store; provider failures become report entries
    and the remaining cells are still produced.

    `ids` restricts generation to a subset of images (e.g. the train
    split); the resulting store then validates as incomplete for the
    untouched ids, which is accurate.
    """
    store = SequenceStore.create(
        root,
        n=manifest.n,
        m=m,
        k=k,
        provider_id=provider.provider_id,
        frame_size=provider.native_resolution,
        provider_meta={"base_seed": base_seed, "m": m, "k": k, **provider.meta()},
    )
    failures: list[str] = []

    def _one(cell: tuple[int, int]) -> str | None:
        i, j = cell
        seed = sequence_seed(base_seed, i, j)
        try:
            image = load_image(manifest.resolve_path(i, image_root))
            seq = generate_sequence(provider, image, k, seed)
            store.put_sequence(i, j, list(seq.frames), seed=seq.seed)
            return None
        except (ProviderError, StoreError, OSError) as e:
            return f"sequence ({i},{j}) seed {seed}: {e}"

    wanted = sorted(set(ids)) if ids is not None else range(1, manifest.n + 1)
    cells = [(i, j) for i in wanted for j in range(1, m + 1)]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for err in pool.map(_one, cells):
                if err:
                    failures.append(err)
    else:
        for cell in cells:
            err = _one(cell)
            if err:
                failures.append(err)

    report = validate_store(store)
    report.generation_failures.extend(failures)
    return store, report


def _scan_native_layout(src: Path, n: int, m: int, k: int) -> list[str]:
    """Paths under src that are neither meta nor in-bounds frame files."""
    strays = []
    for path in sorted(src.rglob("*")):
        if path.is_dir():
            continue
        rel = path.relative_to(src)
        if str(rel) in (META_NAME, MAPPING_NAME) or rel.name.startswith("."):
            continue
        parts = rel.parts
        ok = False
        if len(parts) == 3 and rel.suffix == ".png":
            try:
                i, j, kk = int(parts[0]), int(parts[1]), int(parts[2][:-4])
                ok = 1 <= i <= n and 1 <= j <= m and 1 <= kk <= k
            except ValueError:
                ok = False
        if not ok:
            strays.append(str(rel))
    return strays


def _parse_mapping(path: Path) -> list[tuple[str, int, int, int]]:
    entries = []
    for no, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        if len(fields) != 4:
            raise IngestError(f"{path}:{no}: expected '<source-path> <i> <j> <k>', got {line!r}")
        try:
            entries.append((fields[0], int(fields[1]), int(fields[2]), int(fields[3])))
        except ValueError as e:
            raise IngestError(f"{path}:{no}: {e}") from e
    return entries


def ingest_precomputed(
    src: str | Path,
    manifest: DatasetManifest,
    m: int,
    k: int,
    dest: str | Path | None = None,
    provider_id: str = "precomputed",
) -> tuple[SequenceStore, StoreReport]:
    """Build a validated store from an external dump.

    Native-layout dumps are adopted in place (dest ignored); dumps with a
    mapping file are copied into a fresh store at `dest`.  Files that map
    nowhere are an error, missing frames are report entries.
    """
    srcp = Path(src)
    if not srcp.is_dir():
        raise IngestError(f"dump directory not found: {srcp}")
    n = manifest.n
    mapping_path = srcp / MAPPING_NAME

    if mapping_path.is_file():
        if dest is None:
            raise IngestError("mapping-file dumps require a destination store root")
        entries = _parse_mapping(mapping_path)
        referenced = {e[0] for e in entries}
        strays = [
            str(p.relative_to(srcp))
            for p in sorted(srcp.rglob("*"))
            if p.is_file()
            and p != mapping_path
            and str(p.relative_to(srcp)) not in referenced
        ]
        if strays:
            raise IngestError("stray files not in mapping: " + ", ".join(strays[:10]))
        store = SequenceStore.create(
            dest, n=n, m=m, k=k, provider_id=provider_id,
            provider_meta={"source": str(srcp), "mapping": MAPPING_NAME},
        )
        seen: dict[tuple[int, int], int] = {}
        for rel, i, j, kk in entries:
            if not (1 <= i <= n and 1 <= j <= m and 1 <= kk <= k):
                raise IngestError(f"mapped index ({i},{j},{kk}) outside {n}x{m}x{k}: {rel}")
            src_file = srcp / rel
            if not src_file.is_file():
                raise IngestError(f"mapped file missing: {rel}")
            target = store.frame_path(i, j, kk)
            target.parent.mkdir(parents=True, exist_ok=True)
            if src_file.suffix.lower() == ".png":
                shutil.copyfile(src_file, target)
            else:
                save_png(load_image(src_file), target)
            seen[(i, j)] = seen.get((i, j), 0) + 1
        store.mark_sequences({cell: 0 for cell, count in sorted(seen.items()) if count == k})
        return store, validate_store(store)

    # native layout: adopt in place
    strays = _scan_native_layout(srcp, n, m, k)
    if strays:
        raise IngestError("stray files in dump: " + ", ".join(strays[:10]))
    if (srcp / META_NAME).is_file():
        store = SequenceStore.open(srcp)
        if (store.n, store.m, store.k) != (n, m, k):
            raise IngestError(
                f"dump meta declares {store.n}x{store.m}x{store.k}, expected {n}x{m}x{k}"
            )
    else:
        store = SequenceStore.create(
            srcp, n=n, m=m, k=k, provider_id=provider_id,
            provider_meta={"source": str(srcp)},
        )
    # register fully-present sequences so samplers can check completeness cheaply
    present = {
        (i, j): 0
        for i in range(1, n + 1)
        for j in range(1, m + 1)
        if (i, j) not in store.meta.sequence_seeds
        and all(store.has_frame(i, j, kk) for kk in range(1, k + 1))
    }
    if present:
        store.mark_sequences(present)
    return store, validate_store(store)
