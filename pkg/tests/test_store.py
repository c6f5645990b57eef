import json

import numpy as np
import pytest

from seqaug.errors import StoreError
from seqaug.store import SequenceStore, validate_store


def frames_for(seed, k=3, size=(8, 6)):
    rng = np.random.default_rng(seed)
    return [rng.integers(0, 256, size=(size[1], size[0], 3), dtype=np.uint8) for _ in range(k)]


@pytest.fixture
def small_store(tmp_path):
    store = SequenceStore.create(
        tmp_path / "s", n=2, m=2, k=3, provider_id="test", frame_size=(8, 6)
    )
    for i in (1, 2):
        for j in (1, 2):
            store.put_sequence(i, j, frames_for(i * 10 + j), seed=i * 100 + j)
    return store


def test_meta_round_trip(small_store):
    reopened = SequenceStore.open(small_store.root)
    assert (reopened.n, reopened.m, reopened.k) == (2, 2, 3)
    assert reopened.meta.provider_id == "test"
    assert reopened.meta.frame_size == (8, 6)
    assert reopened.meta.sequence_seeds == small_store.meta.sequence_seeds


def test_layout_paths(small_store):
    p = small_store.frame_path(1, 2, 3)
    assert p == small_store.root / "000001" / "002" / "003.png"
    assert p.is_file()


def test_put_get_round_trip_is_exact(small_store):
    want = frames_for(12)
    for k, frame in enumerate(want, start=1):
        got = small_store.get_frame(1, 2, k)
        assert got.dtype == np.uint8
        assert np.array_equal(got, frame)


def test_indices_are_one_based(small_store):
    with pytest.raises(StoreError):
        small_store.get_frame(0, 1, 1)
    with pytest.raises(StoreError):
        small_store.get_frame(1, 3, 1)
    with pytest.raises(StoreError):
        small_store.get_frame(1, 1, 4)


def test_put_wrong_frame_count_rejected(small_store):
    with pytest.raises(StoreError):
        small_store.put_sequence(1, 1, frames_for(1, k=2))


def test_missing_sequences_empty_when_full(small_store):
    assert small_store.missing_sequences() == []


def test_missing_sequences_scoped(tmp_path):
    store = SequenceStore.create(
        tmp_path / "s", n=3, m=1, k=2, provider_id="test", frame_size=(4, 4)
    )
    store.put_sequence(2, 1, frames_for(0, k=2, size=(4, 4)), seed=5)
    assert store.missing_sequences() == [(1, 1), (3, 1)]
    assert store.missing_sequences(ids=[2]) == []
    assert store.missing_sequences(ids=[1, 2]) == [(1, 1)]


def test_validate_complete(small_store):
    report = validate_store(small_store)
    assert report.complete
    assert "complete" in report.summary()


def test_validate_detects_single_deleted_frame(small_store):
    small_store.frame_path(2, 1, 2).unlink()
    report = validate_store(small_store)
    assert not report.complete
    assert (2, 1, 2) in report.missing


def test_validate_detects_undecodable(small_store):
    small_store.frame_path(1, 1, 1).write_bytes(b"not a png")
    report = validate_store(small_store, decode=True)
    assert not report.complete
    assert (1, 1, 1) in report.undecodable


def test_validate_skip_decode_misses_corruption(small_store):
    small_store.frame_path(1, 1, 1).write_bytes(b"not a png")
    report = validate_store(small_store, decode=False)
    assert report.complete


def test_validate_flags_resolution_mismatch(small_store):
    odd = [np.zeros((9, 9, 3), dtype=np.uint8)] * 3
    small_store.put_sequence(1, 1, odd, seed=1)
    report = validate_store(small_store)
    assert not report.complete
    assert any("(1,1)" in line and "9x9" in line for line in report.resolution_mismatches)


def test_has_frame(small_store):
    assert small_store.has_frame(1, 1, 1)
    small_store.frame_path(1, 1, 1).unlink()
    assert not small_store.has_frame(1, 1, 1)


def test_seed_bookkeeping(small_store):
    seq_seed = small_store.meta.sequence_seeds
    assert seq_seed[(1, 2)] == 102
    assert set(seq_seed) == {(1, 1), (1, 2), (2, 1), (2, 2)}
    # serialized form uses "i:j" keys
    raw = json.loads((small_store.root / "meta.json").read_text())
    assert raw["sequence_seeds"]["1:2"] == 102


def test_mark_sequences_persists(tmp_path):
    store = SequenceStore.create(
        tmp_path / "s", n=2, m=1, k=1, provider_id="test", frame_size=(4, 4)
    )
    store.mark_sequences({(1, 1): 11, (2, 1): 22})
    reopened = SequenceStore.open(store.root)
    assert reopened.meta.sequence_seeds == {(1, 1): 11, (2, 1): 22}


def test_open_missing_store_raises(tmp_path):
    with pytest.raises(StoreError):
        SequenceStore.open(tmp_path / "nope")


def test_corrupt_meta_raises(tmp_path):
    root = tmp_path / "s"
    root.mkdir()
    (root / "meta.json").write_text("{broken", encoding="utf-8")
    with pytest.raises(StoreError):
        SequenceStore.open(root)


def test_create_rejects_bad_dims(tmp_path):
    with pytest.raises(StoreError):
        SequenceStore.create(tmp_path / "s", n=0, m=1, k=1, provider_id="t", frame_size=(4, 4))


def test_meta_json_is_plain_data(small_store):
    raw = json.loads((small_store.root / "meta.json").read_text())
    assert raw["n"] == 2 and raw["m"] == 2 and raw["k"] == 3
    assert raw["provider_id"] == "test"
