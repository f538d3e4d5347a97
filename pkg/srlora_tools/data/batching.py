# srlora_tools/data/batching.py
"""
Seeded mini-batching.

Epoch ``e`` visits samples in the order ``Rng(seed).derive(BATCH_STREAM, e)``
draws, so a stream can be resumed from ``(epoch, position)`` alone.
"""

from __future__ import annotations

from typing import Any, Dict, Iterator, List, Tuple

import numpy as np

from ..errors import ValidationError
from ..linalg import Matrix, Rng
from .data_types import Dataset

BATCH_STREAM = 11
SPLIT_STREAM = 12


def batches(ds: Dataset, batch_size: int, rng: Rng) -> List[Tuple[Matrix, Matrix]]:
    """One epoch of batches in ``rng``'s permutation order; the last batch may be short."""
    if batch_size < 1:
        raise ValidationError(f"batch_size must be >= 1, got {batch_size}")
    order = rng.permutation(ds.n_samples)
    return [
        (ds.inputs[:, order[start:start + batch_size]], ds.targets[:, order[start:start + batch_size]])
        for start in range(0, ds.n_samples, batch_size)
    ]


def train_eval_split(ds: Dataset, eval_fraction: float, seed: int) -> Tuple[Dataset, Dataset]:
    """Seeded shuffle, then the last ``floor(n * eval_fraction)`` samples (at least one) are held out."""
    if not 0.0 < eval_fraction < 1.0:
        raise ValidationError(f"eval_fraction must be in (0, 1), got {eval_fraction}")
    if ds.n_samples < 2:
        raise ValidationError("need at least two samples to split")
    n_eval = min(max(1, int(ds.n_samples * eval_fraction)), ds.n_samples - 1)
    order = Rng(seed).derive(SPLIT_STREAM).permutation(ds.n_samples)
    return ds.take(order[:-n_eval]), ds.take(order[-n_eval:])


class BatchStream:
    """Endless batch source over epochs with a resumable cursor."""

    def __init__(self, ds: Dataset, batch_size: int, seed: int, epoch: int = 0, position: int = 0):
        if batch_size < 1:
            raise ValidationError(f"batch_size must be >= 1, got {batch_size}")
        self.ds = ds
        self.batch_size = batch_size
        self.seed = seed
        self.epoch = epoch
        self.position = position
        self._order = self._epoch_order(epoch)

    def _epoch_order(self, epoch: int) -> np.ndarray:
        return Rng(self.seed).derive(BATCH_STREAM, epoch).permutation(self.ds.n_samples)

    def next_batch(self) -> Tuple[Matrix, Matrix]:
        if self.position >= self.ds.n_samples:
            self.epoch += 1
            self.position = 0
            self._order = self._epoch_order(self.epoch)
        idx = self._order[self.position:self.position + self.batch_size]
        self.position += len(idx)
        return self.ds.inputs[:, idx], self.ds.targets[:, idx]

    def __iter__(self) -> Iterator[Tuple[Matrix, Matrix]]:
        while True:
            yield self.next_batch()

    def get_state(self) -> Dict[str, Any]:
        return {"epoch": self.epoch, "position": self.position}

    def set_state(self, state: Dict[str, Any]) -> None:
        self.epoch = int(state["epoch"])
        self.position = int(state["position"])
        self._order = self._epoch_order(self.epoch)
