"""Balanced training batch streams.

Training draws fixed-size batches with a normal half and a positive
half. Each epoch is one shuffled pass over the normal pool (the short
final chunk is padded by resampling the epoch's permutation); positives
are drawn with replacement per batch, so a small positive pool never
limits epoch length. The id sequence is a pure function of the seed.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np

from ..exceptions import DegenerateInputError, InvalidInputError
from ..validation import check_positive_int, check_seed, rng_from
from .batch import ImageBatch
from .datasets import Dataset
from .scenarios import ResolvedScenario


@dataclass
class IndexedSource:
    """A fixed pool of samples inside one dataset split."""

    data: Dataset
    split: str
    indices: np.ndarray

    def __post_init__(self):
        self.indices = np.asarray(self.indices, dtype=np.int64)
        if self.indices.ndim != 1:
            raise InvalidInputError("indices must be 1-d")

    def __len__(self) -> int:
        return self.indices.shape[0]

    def sample(self, rows) -> ImageBatch:
        rows = np.asarray(rows, dtype=np.int64)
        return self.data.batch(self.split, self.indices[rows])


def array_source(batch: ImageBatch) -> "ArraySource":
    return ArraySource(batch)


@dataclass
class ArraySource:
    """Source over an already materialized batch."""

    batch: ImageBatch

    def __len__(self) -> int:
        return len(self.batch)

    def sample(self, rows) -> ImageBatch:
        return self.batch.take(np.asarray(rows, dtype=np.int64))


def normal_source(resolved: ResolvedScenario) -> IndexedSource:
    return IndexedSource(resolved.data, "train", resolved.train_normal_idx)


def positive_source(resolved: ResolvedScenario) -> IndexedSource | None:
    if not resolved.has_positives:
        return None
    return IndexedSource(resolved.positive_data, "train", resolved.positive_idx)


@dataclass
class TrainBatch:
    epoch: int
    step: int
    normal: ImageBatch
    positive: ImageBatch | None


def balanced_batches(
    normal,
    positive,
    n_normal: int,
    n_oe: int,
    seed: int,
    epochs: int,
) -> Iterator[TrainBatch]:
    """Yield exact-size two-pool batches for ``epochs`` passes.

    ``normal``/``positive`` are sources (``__len__`` + ``sample``); pass
    ``positive=None`` for single-pool training.
    """
    check_positive_int(n_normal, "n_normal")
    check_seed(seed)
    check_positive_int(epochs, "epochs")
    if len(normal) == 0:
        raise DegenerateInputError("balanced_batches: empty normal pool")
    if positive is not None:
        check_positive_int(n_oe, "n_oe")
        if len(positive) == 0:
            raise DegenerateInputError("balanced_batches: empty positive pool")
    rng = rng_from(seed, "balanced-batches")
    n = len(normal)
    steps_per_epoch = max(1, -(-n // n_normal))
    step = 0
    for epoch in range(epochs):
        order = rng.permutation(n)
        for chunk_start in range(0, steps_per_epoch * n_normal, n_normal):
            rows = order[chunk_start : chunk_start + n_normal]
            if rows.shape[0] < n_normal:
                pad = rng.choice(order, size=n_normal - rows.shape[0], replace=True)
                rows = np.concatenate([rows, pad])
            pos_batch = None
            if positive is not None:
                pos_rows = rng.integers(0, len(positive), size=n_oe)
                pos_batch = positive.sample(pos_rows)
            yield TrainBatch(epoch, step, normal.sample(rows), pos_batch)
            step += 1


def steps_per_epoch(pool_size: int, n_normal: int) -> int:
    return max(1, -(-pool_size // n_normal))
