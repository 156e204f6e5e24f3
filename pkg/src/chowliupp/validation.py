"""Input validation helpers for matrices and sample arrays."""

import numbers

import numpy as np

ATOL = 1e-9


def check_square(x, name="matrix"):
    arr = np.array(x, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError(f"{name} must be square, got shape {arr.shape}")
    return arr


def check_correlation_matrix(mu, *, nonnegative=False, name="correlation matrix"):
    """Validate a correlation matrix and return a float64 copy with unit diagonal.

    Estimates need not be realizable by any distribution, so only symmetry,
    finiteness and the [-1, 1] range are enforced.
    """
    arr = check_square(mu, name)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")
    if arr.size and np.abs(arr - arr.T).max() > ATOL:
        raise ValueError(f"{name} is not symmetric")
    if arr.size and (arr.max() > 1 + ATOL or arr.min() < -1 - ATOL):
        raise ValueError(f"{name} has entries outside [-1, 1]")
    if nonnegative and arr.size and arr.min() < 0:
        raise ValueError(f"{name} has negative entries")
    arr += arr.T
    arr *= 0.5
    np.clip(arr, -1.0, 1.0, out=arr)
    np.fill_diagonal(arr, 1.0)
    return arr


def check_distance_matrix(d, name="distance matrix"):
    """Validate a symmetric nonnegative matrix over [0, inf] with zero diagonal."""
    arr = check_square(d, name)
    if np.any(np.isnan(arr)):
        raise ValueError(f"{name} has NaN entries")
    if np.any(arr < 0):
        raise ValueError(f"{name} has negative entries")
    finite = np.isfinite(arr)
    if not np.array_equal(finite, finite.T):
        raise ValueError(f"{name} is not symmetric")
    gap = np.abs(np.where(finite, arr, 0.0) - np.where(finite, arr, 0.0).T)
    if gap.size and gap.max() > ATOL:
        raise ValueError(f"{name} is not symmetric")
    arr = np.where(finite, (arr + arr.T) / 2, arr)
    np.fill_diagonal(arr, 0.0)
    return arr


def check_spins(x, name="samples"):
    """Validate an (m, n) array of +-1 values and return it as int8."""
    arr = np.asarray(x)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2-dimensional, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"{name} must be non-empty")
    if arr.dtype == np.int8:
        bad = np.any(np.abs(arr) != 1)
    else:
        bad = not np.all((arr == 1) | (arr == -1))
    if bad:
        raise ValueError(f"{name} entries must be +1 or -1")
    return arr.astype(np.int8)


def check_eps(eps, *, allow_zero=True):
    if not isinstance(eps, numbers.Real) or not np.isfinite(eps):
        raise ValueError(f"eps must be a finite real, got {eps!r}")
    if eps < 0 or (eps == 0 and not allow_zero):
        raise ValueError(f"eps must be {'>=' if allow_zero else '>'} 0, got {eps}")
    return float(eps)


def check_rng(seed):
    """Accept None, an int, a SeedSequence or a Generator."""
    return np.random.default_rng(seed)
