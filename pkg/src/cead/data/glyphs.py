"""Deterministic rendered-glyph corpora.

Stand-in image sets for offline runs: digits 0-9 and letters a-z drawn
with system TrueType fonts under random affine jitter, stroke-intensity
scaling, blur, and pixel noise. Every sample is a pure function of
``(seed, split, class, index)``, so corpora regenerate bit-identically
in any order.
"""

from __future__ import annotations

import glob
import os
from functools import lru_cache

import numpy as np
from PIL import Image, ImageDraw, ImageFilter, ImageFont

from ..exceptions import InvalidInputError
from ..validation import check_positive_int, check_seed, rng_from

DIGIT_CHARS = "0123456789"
LETTER_CHARS = "abcdefghijklmnopqrstuvwxyz"

_FONT_DIRS = (
    "/usr/share/fonts/truetype/dejavu",
    "/usr/share/fonts/truetype",
    "/usr/share/fonts",
)

_SPLIT_KEYS = {"train": 0, "test": 1}


@lru_cache(maxsize=1)
def _font_paths() -> tuple[str, ...]:
    found: list[str] = []
    for root in _FONT_DIRS:
        if os.path.isdir(root):
            found = sorted(
                p
                for p in glob.glob(os.path.join(root, "**", "*.ttf"), recursive=True)
                if "DejaVu" in os.path.basename(p)
            )
            if found:
                break
    return tuple(found)


@lru_cache(maxsize=64)
def _font(path: str | None, size: int) -> ImageFont.FreeTypeFont:
    if path is None:
        return ImageFont.load_default(size=size)
    return ImageFont.truetype(path, size=size)


def render_glyph(
    char: str,
    rng: np.random.Generator,
    image_size: int = 28,
    oversample: int = 4,
) -> np.ndarray:
    """Render one character as ``(1, image_size, image_size)`` in ``[-1, 1]``.

    Background is -1, strokes reach toward +1.
    """
    if len(char) != 1:
        raise InvalidInputError(f"render_glyph takes a single character, got {char!r}")
    hi = image_size * oversample
    fonts = _font_paths()
    font_path = fonts[int(rng.integers(len(fonts)))] if fonts else None
    font_size = int(hi * rng.uniform(0.50, 0.72))
    canvas = Image.new("L", (hi, hi), 0)
    draw = ImageDraw.Draw(canvas)
    dx = float(rng.uniform(-0.05, 0.05)) * hi
    dy = float(rng.uniform(-0.05, 0.05)) * hi
    draw.text(
        (hi / 2 + dx, hi / 2 + dy),
        char,
        fill=255,
        font=_font(font_path, font_size),
        anchor="mm",
    )
    angle = float(rng.uniform(-20.0, 20.0))
    shear = float(rng.uniform(-0.15, 0.15))
    canvas = canvas.rotate(angle, resample=Image.BILINEAR, fillcolor=0)
    canvas = canvas.transform(
        (hi, hi),
        Image.AFFINE,
        (1.0, shear, -shear * hi / 2, 0.0, 1.0, 0.0),
        resample=Image.BILINEAR,
        fillcolor=0,
    )
    blur = float(rng.uniform(0.0, 0.6)) * oversample / 4.0
    if blur > 0.05:
        canvas = canvas.filter(ImageFilter.GaussianBlur(blur))
    small = canvas.resize((image_size, image_size), resample=Image.BILINEAR)
    arr = np.asarray(small, dtype=np.float32) / 255.0
    arr *= float(rng.uniform(0.70, 1.00))
    arr += rng.normal(0.0, float(rng.uniform(0.01, 0.05)), size=arr.shape)
    arr = np.clip(arr, 0.0, 1.0)
    return (arr[None] * 2.0 - 1.0).astype(np.float32)


def glyph_class_chars(kind: str) -> str:
    if kind == "digits":
        return DIGIT_CHARS
    if kind == "letters":
        return LETTER_CHARS
    raise InvalidInputError(f"unknown glyph kind {kind!r}")


def glyph_split(
    kind: str,
    split: str,
    n_per_class: int,
    seed: int,
    image_size: int = 28,
) -> tuple[np.ndarray, np.ndarray]:
    """All samples of one split as ``(pixels, labels)``, class-major order."""
    chars = glyph_class_chars(kind)
    check_positive_int(n_per_class, "n_per_class")
    check_seed(seed)
    if split not in _SPLIT_KEYS:
        raise InvalidInputError(f"split must be train or test, got {split!r}")
    pixels = np.empty((len(chars) * n_per_class, 1, image_size, image_size), np.float32)
    labels = np.empty(len(chars) * n_per_class, np.int64)
    pos = 0
    for cls, ch in enumerate(chars):
        for idx in range(n_per_class):
            rng = rng_from(seed, kind, _SPLIT_KEYS[split], cls, idx)
            draw_upper = kind == "letters" and rng.random() < 0.5
            pixels[pos] = render_glyph(
                ch.upper() if draw_upper else ch, rng, image_size=image_size
            )
            labels[pos] = cls
            pos += 1
    return pixels, labels
