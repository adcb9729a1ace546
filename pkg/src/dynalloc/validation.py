"""Input validation helpers shared across the package.

All checkers raise ``ValueError`` with a message naming the offending
argument, so failures surface at the API boundary instead of deep inside
numpy broadcasting.
"""

from __future__ import annotations

import numpy as np


def as_float_array(x, name: str, ndim: int | None = None) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if ndim is not None and arr.ndim != ndim:
        raise ValueError(f"{name} must be {ndim}-dimensional, got shape {arr.shape}")
    if arr.size and not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr


def check_costs(costs, name: str = "costs") -> np.ndarray:
    """Validate an action-cost vector: 1-D, positive, strictly increasing."""
    arr = as_float_array(costs, name, ndim=1)
    if arr.size < 1:
        raise ValueError(f"{name} must contain at least one action")
    if np.any(arr <= 0):
        raise ValueError(f"{name} must be strictly positive")
    if np.any(np.diff(arr) <= 0):
        raise ValueError(f"{name} must be strictly increasing")
    return arr


def check_gain_matrix(gains, n_actions: int, name: str = "gains") -> np.ndarray:
    """Validate a gain matrix: 2-D, one column per action, non-negative."""
    arr = np.asarray(gains, dtype=float)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2:
        raise ValueError(f"{name} must be a 2-D matrix, got shape {arr.shape}")
    if arr.shape[1] != n_actions:
        raise ValueError(
            f"{name} has {arr.shape[1]} columns but the action space has "
            f"{n_actions} actions"
        )
    if arr.size and not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    if arr.size and np.any(arr < 0):
        raise ValueError(f"{name} must be non-negative")
    return arr


def check_gain_row(gains, n_actions: int, name: str = "gains") -> np.ndarray:
    arr = as_float_array(gains, name, ndim=1)
    if arr.shape[0] != n_actions:
        raise ValueError(
            f"{name} has length {arr.shape[0]} but the action space has "
            f"{n_actions} actions"
        )
    if arr.size and np.any(arr < 0):
        raise ValueError(f"{name} must be non-negative")
    return arr


def check_nonneg(value: float, name: str) -> float:
    value = float(value)
    if not np.isfinite(value) or value < 0:
        raise ValueError(f"{name} must be a finite non-negative number, got {value}")
    return value


def check_positive(value: float, name: str) -> float:
    value = float(value)
    if not np.isfinite(value) or value <= 0:
        raise ValueError(f"{name} must be a finite positive number, got {value}")
    return value
