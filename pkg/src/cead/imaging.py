"""Pixel-array to image conversions shared by grid export and serving."""

from __future__ import annotations

import io

import numpy as np
from PIL import Image

from .exceptions import InvalidInputError


def to_uint8(pixels: np.ndarray) -> np.ndarray:
    """Map one ``(c, h, w)`` image in [-1, 1] to ``(h, w [, 3])`` uint8."""
    arr = np.asarray(pixels, dtype=np.float64)
    if arr.ndim != 3 or arr.shape[0] not in (1, 3):
        raise InvalidInputError(f"expected (c, h, w) pixels, got shape {arr.shape}")
    flat = np.clip((arr + 1.0) * 127.5, 0.0, 255.0).round().astype(np.uint8)
    if flat.shape[0] == 1:
        return flat[0]
    return np.moveaxis(flat, 0, -1)


def png_bytes(pixels: np.ndarray) -> bytes:
    """Deterministic PNG encoding of one image in [-1, 1]."""
    buffer = io.BytesIO()
    Image.fromarray(to_uint8(pixels)).save(buffer, format="PNG")
    return buffer.getvalue()


def tile_grid(rows: list[np.ndarray]) -> np.ndarray:
    """Stack row stacks of images into one ``(c, H, W)`` grid.

    Each element is ``(n, c, h, w)``; all rows must agree on n, c, h, w.
    """
    if not rows:
        raise InvalidInputError("tile_grid: no rows")
    shapes = {tuple(np.asarray(r).shape) for r in rows}
    if len(shapes) != 1:
        raise InvalidInputError(f"tile_grid: row shapes differ: {sorted(shapes)}")
    stacked = [np.concatenate(list(np.asarray(r)), axis=2) for r in rows]  # join columns
    return np.concatenate(stacked, axis=1)  # join rows
