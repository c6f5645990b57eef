import numpy as np
import pytest

from seqaug.augment import ingest_precomputed, populate_store
from seqaug.errors import IngestError, ProviderError
from seqaug.images import save_png
from seqaug.manifest import DatasetManifest, ImageRecord
from seqaug.providers import GenerationProvider, ToyTrajectoryProvider, TrajectoryConfig
from seqaug.seeding import sequence_seed
from seqaug.store import SequenceStore


def make_dataset(root, n=3, size=24):
    rng = np.random.default_rng(5)
    records = []
    (root / "img").mkdir(parents=True)
    for i in range(1, n + 1):
        arr = rng.integers(0, 256, size=(size, size, 3), dtype=np.uint8)
        save_png(arr, root / "img" / f"{i}.png")
        records.append(ImageRecord(id=i, path=f"img/{i}.png", label=(i - 1) % 2))
    return DatasetManifest(name="t", class_count=2, records=tuple(records))


CFG = TrajectoryConfig(rotation_range=10.0, translation_range=0.05, brightness_range=0.1)


@pytest.fixture
def dataset(tmp_path):
    return tmp_path, make_dataset(tmp_path)


def test_populate_complete(dataset):
    root, man = dataset
    provider = ToyTrajectoryProvider(CFG, native_resolution=(24, 24))
    store, report = populate_store(provider, man, 2, 3, 42, root / "store", image_root=root)
    assert report.complete
    assert (store.n, store.m, store.k) == (3, 2, 3)
    assert store.missing_sequences() == []


def test_populate_uses_per_sequence_seeds(dataset):
    root, man = dataset
    provider = ToyTrajectoryProvider(CFG, native_resolution=(24, 24))
    store, _ = populate_store(provider, man, 2, 3, 42, root / "store", image_root=root)
    assert store.meta.sequence_seeds[(2, 1)] == sequence_seed(42, 2, 1)
    assert store.meta.sequence_seeds[(2, 2)] == sequence_seed(42, 2, 2)


def test_regeneration_is_bit_identical(dataset):
    root, man = dataset
    provider = ToyTrajectoryProvider(CFG, native_resolution=(24, 24))
    a, _ = populate_store(provider, man, 1, 3, 42, root / "a", image_root=root)
    b, _ = populate_store(provider, man, 1, 3, 42, root / "b", image_root=root)
    for i in range(1, 4):
        for k in range(1, 4):
            pa, pb = a.frame_path(i, 1, k), b.frame_path(i, 1, k)
            assert pa.read_bytes() == pb.read_bytes()


def test_different_base_seed_changes_frames(dataset):
    root, man = dataset
    provider = ToyTrajectoryProvider(CFG, native_resolution=(24, 24))
    a, _ = populate_store(provider, man, 1, 3, 42, root / "a", image_root=root)
    b, _ = populate_store(provider, man, 1, 3, 43, root / "b", image_root=root)
    assert any(
        a.frame_path(i, 1, k).read_bytes() != b.frame_path(i, 1, k).read_bytes()
        for i in range(1, 4)
        for k in range(1, 4)
    )


def test_populate_subset_of_ids(dataset):
    root, man = dataset
    provider = ToyTrajectoryProvider(CFG, native_resolution=(24, 24))
    store, report = populate_store(
        provider, man, 1, 2, 42, root / "store", image_root=root, ids=[2]
    )
    assert store.missing_sequences(ids=[2]) == []
    assert store.missing_sequences() == [(1, 1), (3, 1)]
    assert not report.complete  # untouched ids are honestly reported


def test_parallel_population_matches_serial(dataset):
    root, man = dataset
    provider = ToyTrajectoryProvider(CFG, native_resolution=(24, 24))
    serial, _ = populate_store(provider, man, 2, 2, 7, root / "s", image_root=root, workers=1)
    threaded, _ = populate_store(provider, man, 2, 2, 7, root / "p", image_root=root, workers=4)
    for i in range(1, 4):
        for j in (1, 2):
            for k in (1, 2):
                assert serial.frame_path(i, j, k).read_bytes() == threaded.frame_path(
                    i, j, k
                ).read_bytes()
    assert serial.meta.sequence_seeds == threaded.meta.sequence_seeds


class FlakyProvider(GenerationProvider):
    provider_id = "flaky"
    native_resolution = (24, 24)

    def __init__(self):
        self.inner = ToyTrajectoryProvider(CFG, native_resolution=(24, 24))

    def generate(self, image, k, seed):
        if seed % 2 == 0:
            raise ProviderError("even seeds explode", provider_id="flaky", seed=seed)
        return self.inner.generate(image, k, seed)


def test_provider_failures_become_report_entries(dataset):
    root, man = dataset
    store, report = populate_store(FlakyProvider(), man, 2, 2, 0, root / "store", image_root=root)
    n_failed = sum(1 for i in range(1, 4) for j in (1, 2) if sequence_seed(0, i, j) % 2 == 0)
    assert n_failed > 0
    assert len(report.generation_failures) == n_failed
    assert not report.complete
    # surviving cells were still produced
    assert len(store.meta.sequence_seeds) == 6 - n_failed


def test_missing_source_image_is_reported_not_fatal(dataset):
    root, man = dataset
    (root / "img" / "2.png").unlink()
    provider = ToyTrajectoryProvider(CFG, native_resolution=(24, 24))
    store, report = populate_store(provider, man, 1, 2, 42, root / "store", image_root=root)
    assert not report.complete
    assert any("(2,1)" in line for line in report.generation_failures)
    assert store.missing_sequences(ids=[1, 3]) == []


# -- ingestion ---------------------------------------------------------------


def test_ingest_native_layout(dataset):
    root, man = dataset
    provider = ToyTrajectoryProvider(CFG, native_resolution=(24, 24))
    src, _ = populate_store(provider, man, 1, 2, 42, root / "dump", image_root=root)
    (src.root / "meta.json").unlink()  # plain directory in native layout
    (src.root / ".meta.lock").unlink()
    store, report = ingest_precomputed(root / "dump", man, 1, 2)
    assert report.complete
    assert store.missing_sequences() == []


def test_ingest_native_layout_rejects_strays(dataset):
    root, man = dataset
    provider = ToyTrajectoryProvider(CFG, native_resolution=(24, 24))
    populate_store(provider, man, 1, 2, 42, root / "dump", image_root=root)
    (root / "dump" / "notes.txt").write_text("hello")
    with pytest.raises(IngestError) as e:
        ingest_precomputed(root / "dump", man, 1, 2)
    assert "notes.txt" in str(e.value)


def test_ingest_mapping_file(dataset):
    root, man = dataset
    rng = np.random.default_rng(1)
    dump = root / "dump"
    dump.mkdir()
    lines = []
    for i in range(1, 4):
        for k in (1, 2):
            name = f"im{i}_{k}.png"
            save_png(rng.integers(0, 256, size=(24, 24, 3), dtype=np.uint8), dump / name)
            lines.append(f"{name} {i} 1 {k}")
    (dump / "mapping.txt").write_text("\n".join(lines) + "\n")
    store, report = ingest_precomputed(dump, man, 1, 2, dest=root / "store")
    assert report.complete
    assert store.missing_sequences() == []


def test_ingest_mapping_requires_dest(dataset):
    root, man = dataset
    dump = root / "dump"
    dump.mkdir()
    (dump / "mapping.txt").write_text("")
    with pytest.raises(IngestError):
        ingest_precomputed(dump, man, 1, 2)


def test_ingest_mapping_rejects_out_of_bounds(dataset):
    root, man = dataset
    dump = root / "dump"
    dump.mkdir()
    save_png(np.zeros((8, 8, 3), dtype=np.uint8), dump / "x.png")
    (dump / "mapping.txt").write_text("x.png 9 1 1\n")
    with pytest.raises(IngestError) as e:
        ingest_precomputed(dump, man, 1, 2, dest=root / "store")
    assert "(9,1,1)" in str(e.value)


def test_ingest_mapping_partial_sequence_is_incomplete(dataset):
    root, man = dataset
    dump = root / "dump"
    dump.mkdir()
    save_png(np.zeros((8, 8, 3), dtype=np.uint8), dump / "x.png")
    (dump / "mapping.txt").write_text("x.png 1 1 1\n")  # frame 2 of (1,1) never mapped
    store, report = ingest_precomputed(dump, man, 1, 2, dest=root / "store")
    assert not report.complete
    assert (1, 1, 2) in report.missing
    assert store.missing_sequences() == [(1, 1), (2, 1), (3, 1)]


def test_ingest_missing_dump_dir(dataset):
    root, man = dataset
    with pytest.raises(IngestError):
        ingest_precomputed(root / "nope", man, 1, 2)
