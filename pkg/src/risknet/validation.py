"""Input validation helpers shared by the estimators and pipeline functions."""

from __future__ import annotations

import numpy as np

from .errors import ValidationError


def check_series(y, min_len: int = 2, name: str = "series") -> np.ndarray:
    """Coerce to a finite 1-D float array of at least ``min_len`` points."""
    arr = np.asarray(y, dtype=float)
    if arr.ndim != 1:
        raise ValidationError(f"{name} must be 1-dimensional, got shape {arr.shape}")
    if arr.shape[0] < min_len:
        raise ValidationError(f"{name} needs at least {min_len} observations, got {arr.shape[0]}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} contains non-finite values")
    return arr


def check_matrix(X, min_rows: int = 2, min_cols: int = 2, name: str = "matrix") -> np.ndarray:
    """Coerce to a finite 2-D float array with minimum dimensions."""
    arr = np.asarray(X, dtype=float)
    if arr.ndim != 2:
        raise ValidationError(f"{name} must be 2-dimensional, got shape {arr.shape}")
    T, k = arr.shape
    if T < min_rows or k < min_cols:
        raise ValidationError(f"{name} must be at least {min_rows}x{min_cols}, got {T}x{k}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} contains non-finite values")
    return arr


def check_correlation_matrix(R, tol: float = 1e-8, name: str = "correlation matrix") -> np.ndarray:
    """Validate symmetry, unit diagonal and off-diagonal range of ``R``."""
    arr = np.asarray(R, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValidationError(f"{name} must be square, got shape {arr.shape}")
    if not np.allclose(arr, arr.T, atol=tol):
        raise ValidationError(f"{name} is not symmetric")
    if not np.allclose(np.diag(arr), 1.0, atol=tol):
        raise ValidationError(f"{name} diagonal is not 1")
    if np.any(np.abs(arr) > 1.0 + tol):
        raise ValidationError(f"{name} has entries outside [-1, 1]")
    return arr


def check_probability(p: float, name: str = "probability", open_interval: bool = True) -> float:
    p = float(p)
    if open_interval and not 0.0 < p < 1.0:
        raise ValidationError(f"{name} must lie in (0, 1), got {p}")
    if not open_interval and not 0.0 <= p <= 1.0:
        raise ValidationError(f"{name} must lie in [0, 1], got {p}")
    return p
