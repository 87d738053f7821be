"""Input validation helpers for vectors, sample matrices, and covariances."""

import numpy as np

from .exceptions import DimensionMismatch, NotSymmetric, ZeroVector

# Norms below this are treated as zero-length directions.
NORM_FLOOR = 1e-300

# Relative tolerance for the symmetry check of covariance matrices.
SYMMETRY_RTOL = 1e-12


def as_vector(v, name="vector"):
    """Coerce to a finite 1-D float array with at least one entry."""
    arr = np.asarray(v, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise DimensionMismatch(f"{name} must be a nonempty 1-D array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")
    return arr


def as_samples(x, name="samples"):
    """Coerce to a finite n-by-d float matrix."""
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2 or arr.shape[0] == 0 or arr.shape[1] == 0:
        raise DimensionMismatch(f"{name} must be a nonempty 2-D array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")
    return arr


def same_length(u, v):
    if u.shape != v.shape:
        raise DimensionMismatch(f"length mismatch: {u.shape} vs {v.shape}")


def nonzero_norm(v, name="vector"):
    norm = float(np.linalg.norm(v))
    if norm <= NORM_FLOOR:
        raise ZeroVector(f"{name} has norm {norm!r}, below the usable floor")
    return norm


def check_symmetric(m, name="matrix"):
    """Validate a square symmetric float matrix; returns the symmetrized copy."""
    arr = np.asarray(m, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise DimensionMismatch(f"{name} must be square, got shape {arr.shape}")
    scale = float(np.max(np.abs(arr))) if arr.size else 0.0
    asym = float(np.max(np.abs(arr - arr.T))) if arr.size else 0.0
    if asym > SYMMETRY_RTOL * max(scale, 1e-30):
        raise NotSymmetric(f"{name} is asymmetric: max|M - M^T| = {asym:g} at scale {scale:g}")
    # Symmetrize so downstream eigensolvers see an exactly symmetric input.
    return 0.5 * (arr + arr.T)


def check_pm1_labels(y, name="labels"):
    arr = np.asarray(y, dtype=float)
    if not np.all(np.isin(arr, (-1.0, 1.0))):
        raise ValueError(f"{name} must be -1 or +1")
    return arr
