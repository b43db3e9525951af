"""Input validation helpers shared by the estimators and the functional API."""

import numbers

import numpy as np
from sklearn.utils.validation import check_array

from .exceptions import DataError


def check_panel_array(X, min_rows=2, min_cols=2):
    """Return ``X`` as a finite 2-D float64 array with rows as periods."""
    try:
        X = check_array(X, dtype=np.float64, ensure_all_finite=True,
                        ensure_min_samples=min_rows, ensure_min_features=min_cols)
    except ValueError as exc:
        raise DataError(str(exc)) from exc
    return X


def check_positive_int(value, name, minimum=1):
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        raise DataError(f"{name} must be an integer, got {value!r}")
    if value < minimum:
        raise DataError(f"{name} must be >= {minimum}, got {value}")
    return int(value)


def spacing_from_fraction(eta, T):
    """Convert a trimming fraction into an absolute minimum segment length."""
    if not 0 < eta < 1:
        raise DataError(f"eta must lie in (0, 1), got {eta}")
    return int(np.ceil(eta * T))
