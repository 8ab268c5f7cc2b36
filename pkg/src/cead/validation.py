"""Input validation helpers used by the estimators and metric functions.

Every public entry point funnels its array arguments through these so the
error behaviour is uniform: malformed arguments raise
:class:`~cead.exceptions.InvalidInputError` with the offending argument
named, degenerate-but-well-formed ones raise
:class:`~cead.exceptions.DegenerateInputError`.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from .exceptions import DegenerateInputError, InvalidInputError

# Slack for accumulated float error on nominally bounded values.
_BOUND_TOL = 1e-5


def check_pixels(x, name: str = "x") -> np.ndarray:
    """Validate an image stack and return it as float32 ``(n, c, h, w)``.

    Accepts a single image ``(c, h, w)`` or a batch; channels must be 1 or
    3 and values must lie in ``[-1, 1]`` up to float slack (then clipped).
    """
    arr = np.asarray(x, dtype=np.float32)
    if arr.ndim == 3:
        arr = arr[None]
    if arr.ndim != 4:
        raise InvalidInputError(
            f"{name}: expected (n, c, h, w) or (c, h, w), got shape {arr.shape}"
        )
    if arr.shape[1] not in (1, 3):
        raise InvalidInputError(f"{name}: channels must be 1 or 3, got {arr.shape[1]}")
    if arr.shape[2] < 1 or arr.shape[3] < 1:
        raise InvalidInputError(f"{name}: empty spatial dims in shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{name}: contains non-finite values")
    lo, hi = float(arr.min(initial=0.0)), float(arr.max(initial=0.0))
    if lo < -1.0 - _BOUND_TOL or hi > 1.0 + _BOUND_TOL:
        raise InvalidInputError(
            f"{name}: pixel values must lie in [-1, 1], found range [{lo:.4g}, {hi:.4g}]"
        )
    return np.clip(arr, -1.0, 1.0)


def check_scores(s, name: str = "scores") -> np.ndarray:
    """Validate a score vector: 1-d, finite, inside ``[0, 1]``."""
    arr = np.asarray(s, dtype=np.float64).reshape(-1)
    if arr.size == 0:
        raise DegenerateInputError(f"{name}: empty score vector")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{name}: contains non-finite values")
    if arr.min() < -_BOUND_TOL or arr.max() > 1.0 + _BOUND_TOL:
        raise InvalidInputError(
            f"{name}: scores must lie in [0, 1], found range "
            f"[{arr.min():.4g}, {arr.max():.4g}]"
        )
    return np.clip(arr, 0.0, 1.0)


def check_labels(y, n: int | None = None, name: str = "y") -> np.ndarray:
    arr = np.asarray(y)
    if arr.ndim != 1:
        raise InvalidInputError(f"{name}: labels must be 1-d, got shape {arr.shape}")
    if not np.issubdtype(arr.dtype, np.integer):
        if not np.all(arr == arr.astype(np.int64)):
            raise InvalidInputError(f"{name}: labels must be integers")
    arr = arr.astype(np.int64)
    if n is not None and arr.shape[0] != n:
        raise InvalidInputError(f"{name}: expected length {n}, got {arr.shape[0]}")
    return arr


def check_positive_int(value, name: str) -> int:
    if not isinstance(value, (int, np.integer)) or isinstance(value, bool) or value < 1:
        raise InvalidInputError(f"{name}: expected a positive integer, got {value!r}")
    return int(value)


def check_fraction(value, name: str) -> float:
    try:
        f = float(value)
    except (TypeError, ValueError):
        raise InvalidInputError(f"{name}: expected a number in (0, 1], got {value!r}")
    if not (0.0 < f <= 1.0):
        raise InvalidInputError(f"{name}: expected a fraction in (0, 1], got {f!r}")
    return f


def check_unit_interval(value, name: str) -> float:
    try:
        f = float(value)
    except (TypeError, ValueError):
        raise InvalidInputError(f"{name}: expected a number in [0, 1], got {value!r}")
    if not (0.0 <= f <= 1.0) or not np.isfinite(f):
        raise InvalidInputError(f"{name}: expected a value in [0, 1], got {f!r}")
    return f


def check_choice(value, options: Iterable, name: str):
    opts = tuple(options)
    if value not in opts:
        raise InvalidInputError(f"{name}: expected one of {opts}, got {value!r}")
    return value


def check_seed(seed, name: str = "seed") -> int:
    if not isinstance(seed, (int, np.integer)) or isinstance(seed, bool) or seed < 0:
        raise InvalidInputError(f"{name}: expected a non-negative integer, got {seed!r}")
    return int(seed)


def rng_from(seed: int, *key: int | str) -> np.random.Generator:
    """Deterministic generator for ``(seed, *key)``.

    Distinct keys give independent streams, so per-sample or per-split
    randomness does not depend on generation order.
    """
    ints = tuple(
        k if isinstance(k, (int, np.integer)) else _string_key(str(k)) for k in key
    )
    return np.random.Generator(
        np.random.PCG64(np.random.SeedSequence(int(seed), spawn_key=ints))
    )


def _string_key(s: str) -> int:
    # Stable across processes (hash() is salted, so not usable here).
    h = 0
    for ch in s.encode("utf-8"):
        h = (h * 131 + ch) % (2**31 - 1)
    return h


def subset_indices(n: int, fraction: float, rng: np.random.Generator) -> np.ndarray:
    """Sorted random subset of ``range(n)`` covering ``fraction`` of it (at least 1)."""
    check_fraction(fraction, "fraction")
    if n < 1:
        raise DegenerateInputError("subset_indices: empty index range")
    if fraction >= 1.0:
        return np.arange(n)
    k = max(1, int(round(n * fraction)))
    return np.sort(rng.choice(n, size=k, replace=False))


def stack_ids(ids: Sequence[str]) -> np.ndarray:
    arr = np.asarray(ids, dtype=object)
    if arr.ndim != 1:
        raise InvalidInputError(f"ids must be 1-d, got shape {arr.shape}")
    return arr
