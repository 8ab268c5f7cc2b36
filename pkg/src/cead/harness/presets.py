"""Scale presets: full training budgets and reduced reruns.

``paper`` keeps the full budgets. ``desk`` is the workstation
preset: 10% training subsets, detector epochs ÷ 8, generator epochs ÷ 7,
image sizes unchanged, with learning rates raised in proportion to the
epoch cut and slimmer generator channel widths so a run fits a single
CPU. ``smoke`` caps every training stage at a handful of optimizer
steps for pipeline and determinism checks. The preset name is recorded
in every report row so reduced numbers are never confused with
full-scale ones.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from ..exceptions import InvalidInputError


@dataclass(frozen=True)
class ScalePreset:
    """How far to shrink a run relative to the full budgets."""

    name: str
    subset: float = 1.0
    detector_epoch_divisor: int = 1
    ce_epoch_divisor: int = 1
    width_divisor: int = 1
    detector_lr_scale: float = 1.0
    ce_lr_scale: float = 1.0
    detector_epochs: int | None = None  # explicit override (smoke)
    ce_epochs: int | None = None
    max_steps: int | None = None
    max_eval_normals: int | None = None
    max_eval_anomalies: int | None = None
    cache_top: int = 64

    def __post_init__(self):
        if not (0.0 < self.subset <= 1.0):
            raise InvalidInputError(f"subset must be in (0, 1], got {self.subset}")
        for field in ("detector_epoch_divisor", "ce_epoch_divisor", "width_divisor"):
            if getattr(self, field) < 1:
                raise InvalidInputError(f"{field} must be >= 1")


PRESETS: dict[str, ScalePreset] = {
    "paper": ScalePreset(name="paper"),
    "desk": ScalePreset(
        name="desk",
        subset=0.1,
        detector_epoch_divisor=8,
        ce_epoch_divisor=7,
        width_divisor=8,
        detector_lr_scale=8.0,
        ce_lr_scale=5.0,
        max_eval_normals=1024,
        max_eval_anomalies=1024,
    ),
    "smoke": ScalePreset(
        name="smoke",
        subset=0.1,
        width_divisor=16,
        detector_epochs=5,
        ce_epochs=5,
        max_steps=5,
        max_eval_normals=64,
        max_eval_anomalies=64,
        cache_top=16,
    ),
}


def preset_for(scale: str | ScalePreset) -> ScalePreset:
    if isinstance(scale, ScalePreset):
        return scale
    if scale not in PRESETS:
        raise InvalidInputError(
            f"unknown scale {scale!r}; known: {sorted(PRESETS)}"
        )
    return PRESETS[scale]


def scaled_epochs(base: int, divisor: int) -> int:
    return max(1, math.ceil(base / divisor))


def scaled_milestones(milestones: tuple[int, ...], divisor: int) -> tuple[int, ...]:
    return tuple(max(1, math.ceil(m / divisor)) for m in milestones)
