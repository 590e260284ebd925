"""Central finite differences for checking hand-derived gradients."""

from typing import Callable

import numpy as np


def numerical_gradient(objective: Callable[[], float], array: np.ndarray, eps: float = 1e-3) -> np.ndarray:
    """Central difference of ``objective()`` for every entry of ``array``.

    ``array`` is perturbed in place and restored entry by entry, so the
    objective must read it by reference.
    """
    grad = np.zeros_like(array, dtype=np.float64)
    for i in range(array.size):
        original = array.flat[i]
        array.flat[i] = original + eps
        plus = objective()
        array.flat[i] = original - eps
        minus = objective()
        array.flat[i] = original
        grad.flat[i] = (plus - minus) / (2.0 * eps)
    return grad


def relative_error(analytic: np.ndarray, numeric: np.ndarray, floor: float = 1e-8) -> np.ndarray:
    """Entry-wise |analytic - numeric| / max(floor, |numeric|)."""
    analytic = np.asarray(analytic, dtype=np.float64)
    numeric = np.asarray(numeric, dtype=np.float64)
    return np.abs(analytic - numeric) / np.maximum(floor, np.abs(numeric))

