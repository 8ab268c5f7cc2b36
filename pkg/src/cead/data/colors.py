"""Color palette and grayscale-to-color conversion.

A grayscale image in ``[-1, 1]`` is mapped to three channels by scaling
its intensity (shifted to ``[0, 1]``) with the color's RGB weights and
rescaling back to ``[-1, 1]``. Black stays black in every color; only
the lit strokes take the hue.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..exceptions import InvalidInputError
from ..validation import check_pixels

__all__ = ["ColorSpec", "PALETTE", "palette", "colorize", "colorize_batch"]


@dataclass(frozen=True)
class ColorSpec:
    name: str
    rgb: tuple[float, float, float]


PALETTE: tuple[ColorSpec, ...] = (
    ColorSpec("red", (1.0, 0.0, 0.0)),
    ColorSpec("yellow", (1.0, 1.0, 0.0)),
    ColorSpec("green", (0.0, 1.0, 0.0)),
    ColorSpec("cyan", (0.0, 1.0, 1.0)),
    ColorSpec("blue", (0.0, 0.0, 1.0)),
    ColorSpec("pink", (1.0, 0.0, 1.0)),
    ColorSpec("gray", (0.5, 0.5, 0.5)),
)


def palette(include_gray: bool = True) -> tuple[ColorSpec, ...]:
    """The seven-color default, or six with gray dropped."""
    if include_gray:
        return PALETTE
    return tuple(c for c in PALETTE if c.name != "gray")


def color_by_name(name: str) -> ColorSpec:
    for c in PALETTE:
        if c.name == name:
            return c
    raise InvalidInputError(f"unknown color {name!r}")


def colorize(image: np.ndarray, color: ColorSpec) -> np.ndarray:
    """Map one grayscale image ``(1, h, w)`` or ``(h, w)`` to ``(3, h, w)``."""
    arr = np.asarray(image, dtype=np.float32)
    if arr.ndim == 2:
        arr = arr[None]
    if arr.ndim != 3 or arr.shape[0] != 1:
        raise InvalidInputError(
            f"colorize expects a single-channel image, got shape {arr.shape}"
        )
    intensity = (arr[0] + 1.0) * 0.5
    rgb = np.asarray(color.rgb, dtype=np.float32)
    out = intensity[None] * rgb[:, None, None] * 2.0 - 1.0
    return out.astype(np.float32)


def colorize_batch(pixels: np.ndarray, color: ColorSpec) -> np.ndarray:
    """Vectorized :func:`colorize` over ``(n, 1, h, w)``."""
    arr = check_pixels(pixels, "pixels")
    if arr.shape[1] != 1:
        raise InvalidInputError(f"colorize_batch expects 1 channel, got {arr.shape[1]}")
    intensity = (arr + 1.0) * 0.5
    rgb = np.asarray(color.rgb, dtype=np.float32)
    out = intensity * rgb[None, :, None, None] * 2.0 - 1.0
    return out.astype(np.float32)
