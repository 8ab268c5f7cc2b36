import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cead.cegen import ConditionCodebook
from cead.exceptions import InvalidInputError


def test_default_codebook_shape():
    cb = ConditionCodebook()
    assert cb.alpha_grid == (0.0, 0.5, 1.0)
    assert cb.n_levels == 3
    assert cb.n_concepts == 2
    assert cb.n_conditions == 6


def test_encode_is_level_times_concepts_plus_concept():
    cb = ConditionCodebook((0.0, 0.5, 1.0), n_concepts=2)
    assert cb.encode(0.0, 0).tolist() == 0
    assert cb.encode(0.0, 1).tolist() == 1
    assert cb.encode(0.5, 0).tolist() == 2
    assert cb.encode(1.0, 1).tolist() == 5
    assert cb.encode([0.0, 1.0], [1, 0]).tolist() == [1, 4]


def test_quantize_snaps_to_nearest_level():
    cb = ConditionCodebook((0.0, 0.5, 1.0), n_concepts=2)
    levels, values = cb.quantize_alpha([0.0, 0.1, 0.4, 0.6, 0.9, 1.0])
    assert levels.tolist() == [0, 0, 1, 1, 2, 2]
    assert values.tolist() == [0.0, 0.0, 0.5, 0.5, 1.0, 1.0]


def test_quantize_ties_snap_to_lower_level():
    cb = ConditionCodebook((0.0, 0.5, 1.0), n_concepts=2)
    levels, values = cb.quantize_alpha([0.25, 0.75])
    assert levels.tolist() == [0, 1]
    assert values.tolist() == [0.0, 0.5]


def test_decode_inverts_encode():
    cb = ConditionCodebook((0.0, 0.25, 1.0), n_concepts=3)
    alpha = np.array([0.0, 0.25, 1.0, 0.25])
    k = np.array([0, 2, 1, 0])
    values, concepts = cb.decode(cb.encode(alpha, k))
    assert np.array_equal(values, alpha)
    assert np.array_equal(concepts, k)


@given(
    n_levels=st.integers(1, 5),
    n_concepts=st.integers(1, 5),
    data=st.data(),
)
def test_encode_decode_bijective_over_all_conditions(n_levels, n_concepts, data):
    grid = tuple(np.linspace(0.0, 1.0, n_levels)) if n_levels > 1 else (0.5,)
    cb = ConditionCodebook(grid, n_concepts)
    idx = data.draw(st.integers(0, cb.n_conditions - 1))
    values, concepts = cb.decode(idx)
    assert cb.encode(values, concepts).tolist() == idx


def test_validation_rejects_bad_grids_and_inputs():
    with pytest.raises(InvalidInputError):
        ConditionCodebook((), 2)
    with pytest.raises(InvalidInputError):
        ConditionCodebook((0.5, 0.0), 2)
    with pytest.raises(InvalidInputError):
        ConditionCodebook((0.0, 0.5, 0.5), 2)
    with pytest.raises(InvalidInputError):
        ConditionCodebook((0.0, 1.5), 2)
    with pytest.raises(InvalidInputError):
        ConditionCodebook((0.0, 1.0), 0)
    cb = ConditionCodebook()
    with pytest.raises(InvalidInputError):
        cb.quantize_alpha([1.2])
    with pytest.raises(InvalidInputError):
        cb.quantize_alpha([np.nan])
    with pytest.raises(InvalidInputError):
        cb.encode([0.5], [2])
    with pytest.raises(InvalidInputError):
        cb.encode([0.5], [-1])
    with pytest.raises(InvalidInputError):
        cb.decode([6])
