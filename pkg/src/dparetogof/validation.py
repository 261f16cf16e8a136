"""Input validation helpers in the spirit of ``sklearn.utils.validation``."""

from __future__ import annotations

from collections.abc import Mapping

import numpy as np

from .distribution import FrequencyTable, compress
from .exceptions import DomainError

__all__ = ["check_counts", "check_table", "check_generator"]


def check_counts(X, *, name="X"):
    """Validate a sample of positive integer counts.

    Accepts any 1-D array-like or a single-column 2-D array and returns a
    1-D ``int64`` array. Floats are accepted when they hold integral values.
    """
    arr = np.asarray(X)
    if arr.ndim == 2 and arr.shape[1] == 1:
        arr = arr[:, 0]
    if arr.ndim != 1:
        raise DomainError(
            f"{name} must be 1-D or a single column, got an array of shape {arr.shape}"
        )
    if arr.size == 0:
        raise DomainError(f"{name} is empty; at least one observation is required")
    if arr.dtype == object or arr.dtype.kind not in "iuf":
        try:
            arr = arr.astype(float)
        except (TypeError, ValueError) as exc:
            raise DomainError(f"{name} must contain numbers") from exc
    if arr.dtype.kind == "f":
        if not np.all(np.isfinite(arr)):
            raise DomainError(f"{name} contains NaN or infinity")
        if np.any(arr != np.round(arr)):
            raise DomainError(f"{name} must contain integer counts")
    out = arr.astype(np.int64)
    if np.any(out < 1):
        bad = out[out < 1][0]
        raise DomainError(f"{name} must contain positive integers; found {bad}")
    return out


def check_table(X, *, name="X"):
    """Turn a sample, mapping or :class:`FrequencyTable` into a table."""
    if isinstance(X, FrequencyTable):
        return X
    if isinstance(X, Mapping):
        return FrequencyTable.from_mapping(X)
    return compress(check_counts(X, name=name))


def check_generator(seed):
    """Return a :class:`numpy.random.Generator` for ``None``, an int or a generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    if isinstance(seed, np.random.RandomState):
        raise DomainError("pass an int seed or numpy.random.Generator, not a legacy RandomState")
    return np.random.default_rng(seed)
