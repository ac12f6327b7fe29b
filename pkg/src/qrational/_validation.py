"""Input validation helpers shared by all modules."""
import os

import numpy as np

from .exceptions import DimensionError, ValidationError

#: largest condition number accepted before a matrix is declared singular
COND_LIMIT = 1e12


def max_terms(default):
    """Term cap for series/products, overridable through ``QRAT_MAX_TERMS``."""
    env = os.environ.get("QRAT_MAX_TERMS")
    if env is None:
        return default
    try:
        value = int(env)
    except ValueError:
        raise ValidationError(f"QRAT_MAX_TERMS must be an integer, got {env!r}")
    if value < 1:
        raise ValidationError("QRAT_MAX_TERMS must be positive")
    return value


def check_q(q, allow_one=False):
    """Return ``q`` as a float after checking ``0 <= q < 1`` (or ``<= 1``)."""
    try:
        q = float(q)
    except (TypeError, ValueError):
        raise ValidationError(f"q must be a real number, got {q!r}")
    if not np.isfinite(q) or q < 0 or q > 1:
        raise ValidationError(f"q must lie in [0, 1], got {q}")
    if q == 1 and not allow_one:
        raise ValidationError("q = 1 is not allowed here (requires q < 1)")
    return q


def check_tol(tol, name="tol"):
    tol = float(tol)
    if not tol > 0:
        raise ValidationError(f"{name} must be positive, got {tol}")
    return tol


def as_matrix(x, name="matrix", shape=None):
    """Coerce scalars, vectors and nested lists to a 2-D complex array.

    Scalars become 1x1 and 1-D input becomes a column.  ``shape`` entries
    that are ``None`` are not checked.
    """
    arr = np.asarray(x, dtype=complex)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    elif arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    elif arr.ndim != 2:
        raise ValidationError(f"{name} must be at most 2-D, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} contains non-finite entries")
    if shape is not None:
        for axis, (want, got) in enumerate(zip(shape, arr.shape)):
            if want is not None and want != got:
                raise DimensionError(
                    f"{name} has shape {arr.shape}, expected {shape} (axis {axis})")
    return arr


def as_coeffs(coeffs, name="coeffs"):
    """Coerce a Taylor sequence to an array of shape ``(K+1, m, n)``.

    A flat list of scalars is read as 1x1 coefficients.
    """
    arr = np.asarray(coeffs, dtype=complex)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1, 1)
    elif arr.ndim == 2:
        # list of row vectors is ambiguous; treat as list of 1 x n blocks
        arr = arr.reshape(arr.shape[0], 1, arr.shape[1])
    elif arr.ndim != 3:
        raise ValidationError(f"{name} must be a list of matrices, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} contains non-finite entries")
    return arr


def as_points(points, name="points"):
    """1-D complex array of sample points."""
    arr = np.atleast_1d(np.asarray(points, dtype=complex))
    if arr.ndim != 1:
        raise ValidationError(f"{name} must be a flat list of complex numbers")
    return arr


def numeric_rank(s, tol):
    """Number of singular values above ``tol * s[0]`` (zero for a zero spectrum)."""
    s = np.asarray(s, dtype=float)
    if s.size == 0 or s[0] <= 0:
        return 0
    return int(np.count_nonzero(s > tol * s[0]))


def condition_number(M):
    if M.size == 0:
        return 1.0
    s = np.linalg.svd(M, compute_uv=False)
    if s[-1] == 0:
        return np.inf
    return float(s[0] / s[-1])
