"""Categorical conditioning over (target score level, concept).

The generator is conditioned on a single categorical index combining a
discretized target anomaly score and a concept id:
``index = level * n_concepts + concept``. Continuous targets snap to
the nearest grid level; exact midpoints snap to the lower level.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..exceptions import InvalidInputError
from ..validation import check_positive_int


@dataclass(frozen=True)
class ConditionCodebook:
    alpha_grid: tuple[float, ...] = (0.0, 0.5, 1.0)
    n_concepts: int = 2

    def __post_init__(self):
        grid = tuple(float(a) for a in self.alpha_grid)
        if len(grid) < 1:
            raise InvalidInputError("alpha_grid must not be empty")
        if any(not (0.0 <= a <= 1.0) for a in grid):
            raise InvalidInputError(f"alpha_grid values must lie in [0, 1], got {grid}")
        if tuple(sorted(set(grid))) != grid:
            raise InvalidInputError(f"alpha_grid must be strictly increasing, got {grid}")
        check_positive_int(self.n_concepts, "n_concepts")
        object.__setattr__(self, "alpha_grid", grid)

    @property
    def n_levels(self) -> int:
        return len(self.alpha_grid)

    @property
    def n_conditions(self) -> int:
        return self.n_levels * self.n_concepts

    def quantize_alpha(self, alpha) -> tuple[np.ndarray, np.ndarray]:
        """Map target scores to ``(level index, level value)`` arrays."""
        a = np.asarray(alpha, dtype=np.float64)
        if not np.all(np.isfinite(a)) or a.min(initial=0) < 0 or a.max(initial=0) > 1:
            raise InvalidInputError("alpha targets must lie in [0, 1]")
        grid = np.asarray(self.alpha_grid)
        # argmin returns the first (lower) level on distance ties.
        levels = np.abs(a[..., None] - grid).argmin(axis=-1)
        return levels, grid[levels]

    def check_concept(self, k) -> np.ndarray:
        arr = np.asarray(k, dtype=np.int64)
        if arr.min(initial=0) < 0 or arr.max(initial=0) >= self.n_concepts:
            raise InvalidInputError(
                f"concept ids must lie in [0, {self.n_concepts - 1}], got {arr}"
            )
        return arr

    def encode(self, alpha, k) -> np.ndarray:
        """Condition indices for score targets and concept ids."""
        levels, _ = self.quantize_alpha(alpha)
        concepts = self.check_concept(k)
        return levels * self.n_concepts + concepts

    def decode(self, index) -> tuple[np.ndarray, np.ndarray]:
        """Inverse of :meth:`encode`: ``(level value, concept id)``."""
        idx = np.asarray(index, dtype=np.int64)
        if idx.min(initial=0) < 0 or idx.max(initial=0) >= self.n_conditions:
            raise InvalidInputError(
                f"condition index out of range [0, {self.n_conditions - 1}]"
            )
        levels, concepts = np.divmod(idx, self.n_concepts)
        return np.asarray(self.alpha_grid)[levels], concepts
