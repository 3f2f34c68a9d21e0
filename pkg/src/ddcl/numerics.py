"""Dense numeric helpers shared by every other module.

Conventions: float64 everywhere, feature batches are ``(n, d)`` with samples
as rows, prototype matrices are ``(d, k)`` with prototypes as columns.
"""

import numpy as np

DEFAULT_SEED = 0


class DegenerateInputError(ValueError):
    """Raised when a statistic is undefined for the given input."""


def as_matrix(a, name="matrix", ndim=2):
    """Return ``a`` as a finite float64 array with ``ndim`` dimensions."""
    arr = np.asarray(a, dtype=np.float64)
    if arr.ndim != ndim:
        raise ValueError(f"{name} must be {ndim}-D, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains NaN or Inf")
    return arr


def make_rng(seed=DEFAULT_SEED):
    """Seeded PCG64 generator; its output stream is fixed across platforms."""
    return np.random.Generator(np.random.PCG64(int(seed)))


def pairwise_sq_dists(Z, P):
    """Squared distances between rows of ``Z`` (n, d) and columns of ``P`` (d, k).

    Computed by explicit differences rather than the expanded
    ``|z|^2 - 2 z.p + |p|^2`` form, so the result is exactly zero for
    coincident points and never negative.
    """
    Z = np.atleast_2d(np.asarray(Z, dtype=np.float64))
    P = np.asarray(P, dtype=np.float64)
    if P.ndim == 1:
        P = P[:, None]
    if Z.shape[1] != P.shape[0]:
        raise ValueError(
            f"dimension mismatch: features have d={Z.shape[1]} but prototypes have d={P.shape[0]}"
        )
    n, k = Z.shape[0], P.shape[1]
    out = np.empty((n, k))
    for j in range(k):
        diff = Z - P[:, j]
        out[:, j] = np.einsum("nd,nd->n", diff, diff)
    return out


def frobenius_norm(M):
    M = np.asarray(M, dtype=np.float64)
    return float(np.sqrt(np.sum(M * M)))


def pearson_corr(a, b):
    a = np.asarray(a, dtype=np.float64).ravel()
    b = np.asarray(b, dtype=np.float64).ravel()
    if a.shape != b.shape:
        raise ValueError(f"series lengths differ: {a.size} vs {b.size}")
    if a.size < 3:
        raise DegenerateInputError(f"need at least 3 points for a correlation, got {a.size}")
    da = a - a.mean()
    db = b - b.mean()
    sa = np.sqrt(np.dot(da, da))
    sb = np.sqrt(np.dot(db, db))
    if sa == 0.0 or sb == 0.0:
        raise DegenerateInputError("correlation undefined for a constant series")
    r = float(np.dot(da, db) / (sa * sb))
    return min(1.0, max(-1.0, r))
