"""Input validation helpers shared by the estimator, CLI, and core modules."""

from __future__ import annotations

import numbers

import numpy as np

from .errors import ConfigError


def check_scalar(value, name: str, *, minimum=None, maximum=None,
                 strict_min: bool = False, strict_max: bool = False) -> float:
    """Validate a real scalar, optionally against (possibly strict) bounds."""
    if not isinstance(value, numbers.Real) or isinstance(value, bool):
        raise ConfigError(f"{name} must be a real number, got {value!r}")
    x = float(value)
    if not np.isfinite(x):
        raise ConfigError(f"{name} must be finite, got {x}")
    if minimum is not None:
        if strict_min and not x > minimum:
            raise ConfigError(f"{name} must be > {minimum}, got {x}")
        if not strict_min and not x >= minimum:
            raise ConfigError(f"{name} must be >= {minimum}, got {x}")
    if maximum is not None:
        if strict_max and not x < maximum:
            raise ConfigError(f"{name} must be < {maximum}, got {x}")
        if not strict_max and not x <= maximum:
            raise ConfigError(f"{name} must be <= {maximum}, got {x}")
    return x


def check_int(value, name: str, *, minimum=None) -> int:
    if not isinstance(value, numbers.Integral) or isinstance(value, bool):
        raise ConfigError(f"{name} must be an integer, got {value!r}")
    n = int(value)
    if minimum is not None and n < minimum:
        raise ConfigError(f"{name} must be >= {minimum}, got {n}")
    return n


def as_query_array(X, n_columns: int = 3, name: str = "X") -> np.ndarray:
    """Coerce query points to a finite float array of shape (m, n_columns).

    A single query may be given as a flat sequence of length ``n_columns``.
    """
    arr = np.asarray(X, dtype=float)
    if arr.ndim == 1:
        if arr.size != n_columns:
            raise ConfigError(
                f"{name} must have {n_columns} columns, got shape {arr.shape}")
        arr = arr.reshape(1, n_columns)
    if arr.ndim != 2 or arr.shape[1] != n_columns:
        raise ConfigError(
            f"{name} must be an (m, {n_columns}) array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ConfigError(f"{name} contains non-finite entries")
    return arr
