"""In-memory image batch with ids and labels."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import torch

from ..exceptions import InvalidInputError
from ..validation import check_labels, check_pixels, stack_ids


@dataclass
class ImageBatch:
    """A stack of images plus per-sample ids and integer labels.

    ``pixels`` is float32 ``(n, c, h, w)`` in ``[-1, 1]`` with 1 or 3
    channels; ``ids`` are stable string identifiers.
    """

    pixels: np.ndarray
    ids: np.ndarray
    labels: np.ndarray = field(default=None)

    def __post_init__(self):
        self.pixels = check_pixels(self.pixels, "pixels")
        self.ids = stack_ids(self.ids)
        if len(self.ids) != len(self.pixels):
            raise InvalidInputError(
                f"ids length {len(self.ids)} != batch size {len(self.pixels)}"
            )
        if self.labels is None:
            self.labels = np.zeros(len(self.pixels), dtype=np.int64)
        else:
            self.labels = check_labels(self.labels, len(self.pixels), "labels")

    def __len__(self) -> int:
        return self.pixels.shape[0]

    @property
    def channels(self) -> int:
        return self.pixels.shape[1]

    @property
    def image_size(self) -> int:
        return self.pixels.shape[2]

    def take(self, indices) -> "ImageBatch":
        idx = np.asarray(indices, dtype=np.int64)
        return ImageBatch(self.pixels[idx], self.ids[idx], self.labels[idx])

    def tensor(self, device: str | torch.device = "cpu") -> torch.Tensor:
        return torch.from_numpy(self.pixels).to(device)

    def index_of(self, sample_id: str) -> int:
        hits = np.nonzero(self.ids == sample_id)[0]
        if hits.size == 0:
            raise InvalidInputError(f"unknown sample id {sample_id!r}")
        return int(hits[0])

    @staticmethod
    def concat(parts: list["ImageBatch"]) -> "ImageBatch":
        if not parts:
            raise InvalidInputError("concat: no batches given")
        return ImageBatch(
            np.concatenate([p.pixels for p in parts]),
            np.concatenate([p.ids for p in parts]),
            np.concatenate([p.labels for p in parts]),
        )
