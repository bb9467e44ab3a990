#src/core/utils/validation.py
"""
Array validation helpers shared by the estimation modules.
All helpers raise InvalidInputException naming the offending parameter.
"""

from typing import Optional

import numpy as np
from scipy import linalg

from src.core.exceptions import InvalidInputException

PROBABILITY_TOL = 1e-12


def as_finite_array(value, name: str, ndim: Optional[int] = None) -> np.ndarray:
    """Convert to a float array, checking dimensionality and finiteness."""
    arr = np.asarray(value, dtype=float)
    if ndim is not None and arr.ndim != ndim:
        raise InvalidInputException(
            f"{name} must be {ndim}-dimensional, got shape {arr.shape}",
            parameter=name,
        )
    if not np.all(np.isfinite(arr)):
        raise InvalidInputException(
            f"{name} contains non-finite entries", parameter=name
        )
    return arr


def check_probability_vector(
    value, name: str, tol: float = PROBABILITY_TOL
) -> np.ndarray:
    """Validate a nonnegative vector summing to one within ``tol``."""
    arr = as_finite_array(value, name, ndim=1)
    if arr.size == 0:
        raise InvalidInputException(f"{name} must not be empty", parameter=name)
    if np.any(arr < 0):
        raise InvalidInputException(f"{name} has negative entries", parameter=name)
    total = float(arr.sum())
    if abs(total - 1.0) > tol:
        raise InvalidInputException(
            f"{name} sums to {total!r}, expected 1", parameter=name
        )
    return arr


def check_positive(value: float, name: str) -> float:
    value = float(value)
    if not np.isfinite(value) or value <= 0:
        raise InvalidInputException(
            f"{name} must be positive, got {value!r}", parameter=name
        )
    return value


def check_spd(sigma, name: str = "Sigma", min_eig: float = 1e-10) -> np.ndarray:
    """Validate a symmetric positive definite matrix."""
    arr = as_finite_array(sigma, name, ndim=2)
    if arr.shape[0] != arr.shape[1]:
        raise InvalidInputException(
            f"{name} must be square, got {arr.shape}", parameter=name
        )
    if not np.allclose(arr, arr.T, rtol=1e-10, atol=1e-12):
        raise InvalidInputException(f"{name} must be symmetric", parameter=name)
    smallest = float(linalg.eigvalsh(arr)[0])
    if smallest <= min_eig:
        raise InvalidInputException(
            f"{name} is not positive definite (min eigenvalue {smallest:.3e})",
            parameter=name,
        )
    return arr


def frozen(arr: np.ndarray) -> np.ndarray:
    """Return a read-only copy."""
    out = np.array(arr, dtype=float, copy=True)
    out.setflags(write=False)
    return out
