"""Input validation helpers shared by the estimators."""

import numpy as np
from sklearn.utils.validation import check_array

from .exceptions import DimensionMismatch, InvalidValue


def check_vectors(X, dim=None, name="X"):
    """Return ``X`` as a finite float64 2-D array, optionally of width ``dim``."""
    try:
        X = check_array(X, dtype=np.float64, ensure_all_finite=False)
    except ValueError as exc:
        raise DimensionMismatch(f"{name}: {exc}") from exc
    if not np.all(np.isfinite(X)):
        bad = np.argwhere(~np.isfinite(X))[0]
        raise InvalidValue(f"{name} has a non-finite value at row {bad[0]}, column {bad[1]}")
    if dim is not None and X.shape[1] != dim:
        raise DimensionMismatch(f"{name} has {X.shape[1]} columns, expected {dim}")
    return X


def check_vector(v, dim=None, name="vector"):
    v = np.asarray(v, dtype=np.float64)
    if v.ndim != 1:
        raise DimensionMismatch(f"{name} must be 1-D, got shape {v.shape}")
    if dim is not None and v.shape[0] != dim:
        raise DimensionMismatch(f"{name} has length {v.shape[0]}, expected {dim}")
    if not np.all(np.isfinite(v)):
        raise InvalidValue(f"{name} contains non-finite values")
    return v


def check_survival_target(y, n=None):
    """Split a survival target into ``(time, event)``.

    ``y`` may be a pair ``(time, event)``, an ``(n, 2)`` array, or a numpy
    structured array with one float field and one bool field (the
    scikit-survival layout).
    """
    if isinstance(y, np.ndarray) and y.dtype.names:
        names = y.dtype.names
        ev = next(f for f in names if y.dtype[f] == np.bool_)
        tm = next(f for f in names if f != ev)
        time, event = y[tm], y[ev]
    elif isinstance(y, tuple) and len(y) == 2:
        time, event = y
    else:
        arr = np.asarray(y, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[1] != 2:
            raise DimensionMismatch("survival target must be (time, event) or an (n, 2) array")
        time, event = arr[:, 0], arr[:, 1]
    time = np.asarray(time, dtype=np.float64)
    event_arr = np.asarray(event)
    if event_arr.dtype != np.bool_:
        if not np.all(np.isin(event_arr, (0, 1))):
            raise InvalidValue("event indicator must be 0/1")
        event_arr = event_arr.astype(bool)
    if time.shape != event_arr.shape or time.ndim != 1:
        raise DimensionMismatch("time and event must be 1-D and the same length")
    if n is not None and time.shape[0] != n:
        raise DimensionMismatch(f"target has {time.shape[0]} rows, X has {n}")
    if not np.all(np.isfinite(time)) or np.any(time <= 0):
        raise InvalidValue("survival times must be finite and positive")
    return time, event_arr


def check_mask(mask, shape=None):
    mask = np.asarray(mask)
    if mask.ndim != 2:
        raise DimensionMismatch(f"label mask must be 2-D, got shape {mask.shape}")
    if not np.issubdtype(mask.dtype, np.integer):
        if not np.all(np.mod(mask, 1) == 0):
            raise InvalidValue("label mask must hold integers")
        mask = mask.astype(np.int64)
    if np.any(mask < 0):
        raise InvalidValue("label mask values must be non-negative")
    if shape is not None and mask.shape != tuple(shape):
        raise DimensionMismatch(f"mask shape {mask.shape} does not match patch shape {tuple(shape)}")
    return mask
