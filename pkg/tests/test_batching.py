# tests/test_batching.py
import numpy as np
import pytest

from srlora_tools.data import BatchStream, Dataset, batches, train_eval_split
from srlora_tools.errors import ValidationError
from srlora_tools.linalg import Rng


def indexed_dataset(n: int) -> Dataset:
    """Sample ``i`` carries ``i`` as its only feature."""
    return Dataset(inputs=np.arange(n, dtype=np.float64).reshape(1, -1), targets=np.zeros((1, n)))


def test_one_epoch_visits_every_sample_once():
    parts = batches(indexed_dataset(10), 4, Rng(0))
    assert [x.shape[1] for x, _ in parts] == [4, 4, 2]
    seen = np.concatenate([x[0] for x, _ in parts])
    assert sorted(seen.tolist()) == list(range(10))
    with pytest.raises(ValidationError):
        batches(indexed_dataset(3), 0, Rng(0))


def test_stream_follows_the_epoch_permutation():
    ds = indexed_dataset(7)
    stream = BatchStream(ds, 3, seed=5)
    epoch0 = Rng(5).derive(11, 0).permutation(7)
    epoch1 = Rng(5).derive(11, 1).permutation(7)
    got = [stream.next_batch()[0][0].tolist() for _ in range(4)]
    assert got[0] == epoch0[:3].tolist()
    assert got[2] == epoch0[6:].tolist()
    assert got[3] == epoch1[:3].tolist()
    assert stream.get_state() == {"epoch": 1, "position": 3}


def test_stream_resumes_from_its_cursor():
    ds = indexed_dataset(9)
    stream = BatchStream(ds, 4, seed=2)
    for _ in range(3):
        stream.next_batch()
    state = stream.get_state()
    expected = [stream.next_batch()[0].tolist() for _ in range(5)]
    resumed = BatchStream(ds, 4, seed=2)
    resumed.set_state(state)
    assert [resumed.next_batch()[0].tolist() for _ in range(5)] == expected


def test_train_eval_split_partitions_the_samples():
    train, held_out = train_eval_split(indexed_dataset(20), 0.25, seed=4)
    assert (train.n_samples, held_out.n_samples) == (15, 5)
    together = sorted(train.inputs[0].tolist() + held_out.inputs[0].tolist())
    assert together == list(range(20))
    again, _ = train_eval_split(indexed_dataset(20), 0.25, seed=4)
    np.testing.assert_array_equal(again.inputs, train.inputs)


def test_train_eval_split_keeps_both_sides_non_empty():
    train, held_out = train_eval_split(indexed_dataset(3), 0.1, seed=0)
    assert (train.n_samples, held_out.n_samples) == (2, 1)
    with pytest.raises(ValidationError):
        train_eval_split(indexed_dataset(3), 1.0, seed=0)
