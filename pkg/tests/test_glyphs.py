import numpy as np
import pytest

from cead.data.glyphs import DIGIT_CHARS, _font_paths, glyph_split, render_glyph
from cead.exceptions import InvalidInputError
from cead.validation import rng_from


def test_truetype_fonts_are_available():
    assert len(_font_paths()) >= 1


def test_render_shape_and_range():
    img = render_glyph("5", rng_from(0, "t"))
    assert img.shape == (1, 28, 28)
    assert img.dtype == np.float32
    assert img.min() >= -1.0
    assert img.max() <= 1.0
    # The stroke must actually appear.
    assert (img > 0).sum() > 10


def test_render_is_deterministic_per_rng_key():
    a = render_glyph("3", rng_from(5, "k", 0))
    b = render_glyph("3", rng_from(5, "k", 0))
    c = render_glyph("3", rng_from(5, "k", 1))
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_split_is_balanced_and_class_major():
    px, y = glyph_split("digits", "test", 4, seed=1)
    assert px.shape == (40, 1, 28, 28)
    assert np.array_equal(np.bincount(y), np.full(10, 4))
    assert np.array_equal(y, np.repeat(np.arange(10), 4))


def test_train_and_test_splits_differ():
    tr, _ = glyph_split("digits", "train", 2, seed=0)
    te, _ = glyph_split("digits", "test", 2, seed=0)
    assert not np.array_equal(tr, te)


def test_letters_cover_26_classes():
    px, y = glyph_split("letters", "test", 1, seed=0)
    assert px.shape[0] == 26
    assert sorted(set(y.tolist())) == list(range(26))


def test_unknown_kind_or_split_rejected():
    with pytest.raises(InvalidInputError):
        glyph_split("emoji", "train", 1, seed=0)
    with pytest.raises(InvalidInputError):
        glyph_split("digits", "validation", 1, seed=0)
    with pytest.raises(InvalidInputError):
        render_glyph("ab", rng_from(0, "x"))


def test_same_class_samples_vary():
    px, y = glyph_split("digits", "train", 3, seed=0)
    sevens = px[y == DIGIT_CHARS.index("7")]
    assert not np.array_equal(sevens[0], sevens[1])
