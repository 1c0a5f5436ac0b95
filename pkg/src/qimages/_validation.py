"""Input validation helpers shared by the algebra, walk and estimator layers."""

from __future__ import annotations

import numbers

import numpy as np

from .exceptions import ShapeError, ValidationError


def check_index(i, n: int, name: str = "i") -> int:
    if isinstance(i, bool) or not isinstance(i, numbers.Integral):
        raise ValidationError(f"{name} must be an integer, got {i!r}")
    if not 0 <= i < n:
        raise ValidationError(f"{name}={i} out of range [0, {n})")
    return int(i)


def check_int(value, name: str, minimum: int | None = None) -> int:
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        raise ValidationError(f"{name} must be an integer, got {value!r}")
    if minimum is not None and value < minimum:
        raise ValidationError(f"{name} must be >= {minimum}, got {value}")
    return int(value)


def as_complex_vector(values, name: str = "amplitudes") -> np.ndarray:
    arr = np.asarray(values, dtype=np.complex128)
    if arr.ndim != 1:
        raise ShapeError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if arr.size == 0:
        raise ValidationError(f"{name} must not be empty")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} contains non-finite values")
    return arr


def check_amplitudes(X, normalize: bool = False, atol: float = 1e-9) -> np.ndarray:
    """Validate a batch of amplitude vectors.

    Parameters
    ----------
    X : array-like of shape (n_samples, n_outcomes)
        Complex (or real) amplitudes, one state per row.  A single 1-D
        vector is treated as one sample.
    normalize : bool
        Rescale each row to unit norm.  When False, rows whose squared norm
        differs from 1 by more than ``atol`` are rejected.

    Returns
    -------
    X : ndarray of complex128, shape (n_samples, n_outcomes)
    """
    # sklearn's check_array refuses complex input, hence this helper.
    arr = np.asarray(X, dtype=np.complex128)
    if arr.ndim == 1:
        arr = arr[np.newaxis, :]
    if arr.ndim != 2:
        raise ShapeError(f"expected a 2-D array of amplitudes, got shape {arr.shape}")
    if arr.shape[0] == 0 or arr.shape[1] == 0:
        raise ValidationError(f"empty amplitude array of shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError("amplitudes contain non-finite values")
    norms = np.sqrt(np.sum(np.abs(arr) ** 2, axis=1))
    if normalize:
        if np.any(norms == 0):
            raise ValidationError("cannot normalize a zero amplitude vector")
        return arr / norms[:, np.newaxis]
    bad = np.flatnonzero(np.abs(norms**2 - 1.0) > atol)
    if bad.size:
        raise ValidationError(
            f"row {bad[0]} has squared norm {norms[bad[0]] ** 2:.12g}; "
            "pass normalize=True to rescale"
        )
    return arr


def check_probabilities(P, atol: float = 1e-9) -> np.ndarray:
    """Validate a batch of points on the probability simplex (rows sum to 1)."""
    arr = np.asarray(P, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[np.newaxis, :]
    if arr.ndim != 2 or arr.shape[1] < 2:
        raise ShapeError(f"expected shape (n_samples, d>=2), got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError("probabilities contain non-finite values")
    if np.any(arr < -atol):
        raise ValidationError("probabilities must be non-negative")
    sums = arr.sum(axis=1)
    if np.any(np.abs(sums - 1.0) > atol):
        raise ValidationError("each row of probabilities must sum to 1")
    arr = np.clip(arr, 0.0, None)
    return arr / arr.sum(axis=1, keepdims=True)
