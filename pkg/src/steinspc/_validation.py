"""Input validation helpers shared by the functional API and the estimators."""

from __future__ import annotations

import numpy as np

from .exceptions import InputDataError


def check_counts(data, min_length: int = 1, name: str = "data") -> np.ndarray:
    """Return ``data`` as a 1-D int64 array of nonnegative counts.

    Accepts sequences, 1-D arrays, single-column 2-D arrays and pandas
    objects.  Integer-valued floats are accepted; anything else raises
    :class:`InputDataError`.
    """
    arr = np.asarray(data)
    if arr.ndim == 2 and arr.shape[1] == 1:
        arr = arr[:, 0]
    if arr.ndim != 1:
        raise InputDataError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if arr.size < min_length:
        raise InputDataError(f"{name} needs at least {min_length} observation(s), got {arr.size}")
    if arr.dtype.kind == "b" or arr.dtype.kind not in "iuf":
        raise InputDataError(f"{name} must be numeric counts, got dtype {arr.dtype}")
    if arr.dtype.kind == "f":
        if not np.isfinite(arr).all():
            raise InputDataError(f"{name} contains non-finite values")
        if (arr != np.round(arr)).any():
            raise InputDataError(f"{name} contains non-integer values")
    if (arr < 0).any():
        raise InputDataError(f"{name} contains negative values")
    return arr.astype(np.int64)
