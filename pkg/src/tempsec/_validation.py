"""Small input checks shared by the model, solvers and estimators."""

import math
import numbers

import numpy as np

# absolute slack used when comparing durations and loads against limits
TOL = 1e-9


def check_gamma(gamma):
    gamma = float(gamma)
    if not (0.0 < gamma <= 1.0) or math.isnan(gamma):
        raise ValueError(f"gamma must lie in (0, 1], got {gamma!r}")
    return gamma


def check_positive(name, value):
    value = float(value)
    if not value > 0.0 or math.isinf(value):
        raise ValueError(f"{name} must be a positive finite number, got {value!r}")
    return value


def check_integer_capacity(capacity):
    """Cardinality capacities must be integers >= 1; non-integral input is rejected, not rounded."""
    if isinstance(capacity, bool):
        raise ValueError("capacity must be an integer >= 1")
    if isinstance(capacity, numbers.Integral):
        value = int(capacity)
    else:
        as_float = float(capacity)
        if not as_float.is_integer():
            raise ValueError(
                f"cardinality capacity must be integral, got {capacity!r}"
            )
        value = int(as_float)
    if value < 1:
        raise ValueError(f"capacity must be >= 1, got {capacity!r}")
    return value


def check_unit_interval(name, value, low_open=False):
    value = float(value)
    ok = (0.0 < value <= 1.0) if low_open else (0.0 <= value <= 1.0)
    if not ok:
        bracket = "(0, 1]" if low_open else "[0, 1]"
        raise ValueError(f"{name} must lie in {bracket}, got {value!r}")
    return value


def as_float_vector(name, values, allow_empty=True):
    arr = np.asarray(values, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if not allow_empty and arr.size == 0:
        raise ValueError(f"{name} must not be empty")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    return arr


def ceil_inverse(gamma):
    """ceil(1/gamma), robust to 1/gamma landing one ulp above an integer."""
    inv = 1.0 / gamma
    nearest = round(inv)
    if abs(inv - nearest) <= 1e-9 * max(1.0, inv):
        return int(nearest)
    return int(math.ceil(inv))
