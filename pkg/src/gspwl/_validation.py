"""Input checks for complex arrays.

scikit-learn's ``check_array`` refuses complex dtypes, so the estimators use
these small helpers instead.
"""

import numpy as np

from .exceptions import ConfigError, DimensionMismatch, EmptyDataset


def as_complex_matrix(a, name="array", n_features=None):
    """Return ``a`` as a finite complex 2-D array ``(n_samples, n_features)``.

    A 1-D input is read as a single sample.
    """
    arr = np.asarray(a)
    if arr.dtype == object:
        raise ConfigError(f"{name} has object dtype")
    arr = arr.astype(complex, copy=False)
    if arr.ndim == 1:
        arr = arr[np.newaxis, :]
    if arr.ndim != 2:
        raise DimensionMismatch(f"{name} must be 1-D or 2-D, got shape {arr.shape}")
    if arr.shape[0] == 0:
        raise EmptyDataset(f"{name} has no samples")
    if not np.all(np.isfinite(arr)):
        raise ConfigError(f"{name} contains NaN or infinity")
    if n_features is not None and arr.shape[1] != n_features:
        raise DimensionMismatch(
            f"{name} has {arr.shape[1]} features, expected {n_features}"
        )
    return arr


def check_pair(Y, X):
    """Validate paired observation and signal samples of equal shape."""
    Y = as_complex_matrix(Y, "Y")
    X = as_complex_matrix(X, "X")
    if X.shape != Y.shape:
        raise DimensionMismatch(f"X has shape {X.shape} but Y has shape {Y.shape}")
    return Y, X


def check_square(a, name, n=None, dtype=complex):
    arr = np.asarray(a, dtype=dtype)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise DimensionMismatch(f"{name} must be square, got shape {arr.shape}")
    if n is not None and arr.shape[0] != n:
        raise DimensionMismatch(f"{name} is {arr.shape[0]}x{arr.shape[0]}, expected {n}x{n}")
    return arr


def check_vector(a, name, n=None, dtype=complex):
    arr = np.asarray(a, dtype=dtype)
    if arr.ndim != 1:
        raise DimensionMismatch(f"{name} must be 1-D, got shape {arr.shape}")
    if n is not None and arr.shape[0] != n:
        raise DimensionMismatch(f"{name} has length {arr.shape[0]}, expected {n}")
    return arr


def restore_shape(out, like):
    """Drop the sample axis again if the caller passed a single vector."""
    return out[0] if np.ndim(like) == 1 else out
