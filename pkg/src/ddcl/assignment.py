"""Soft/hard assignments and the assignment-covariance diagnostics.

Cluster indices are 0-based throughout the package; ties go to the lowest
index (``np.argmin`` semantics), the same rule k-means and the metrics use.
"""

import numpy as np

from .numerics import pairwise_sq_dists


def _check_temperature(T):
    if not T > 0:
        raise ValueError(f"temperature must be > 0, got {T}")


def softmax_neg_dists(D, T):
    """Rows of ``softmax(-D / T)`` with the minimum distance shifted to zero."""
    _check_temperature(T)
    D = np.asarray(D, dtype=np.float64)
    A = -(D - D.min(axis=-1, keepdims=True)) / T
    E = np.exp(A)
    return E / E.sum(axis=-1, keepdims=True)


def soft_assign(z, P, T):
    """Temperature-scaled soft assignment of one sample ``z`` to the columns of ``P``."""
    d = pairwise_sq_dists(np.asarray(z, dtype=np.float64)[None, :], P)[0]
    return softmax_neg_dists(d, T)


def soft_assign_batch(Z, P, T):
    """Soft assignments for a whole batch. Returns ``(Q, D)`` with D the squared distances."""
    D = pairwise_sq_dists(Z, P)
    return softmax_neg_dists(D, T), D


def hard_assign(z, P):
    d = pairwise_sq_dists(np.asarray(z, dtype=np.float64)[None, :], P)[0]
    return int(np.argmin(d))


def hard_assign_batch(Z, P):
    return np.argmin(pairwise_sq_dists(Z, P), axis=1)


def sigma(q):
    """Assignment covariance ``diag(q) - q q^T``."""
    q = np.asarray(q, dtype=np.float64)
    return np.diag(q) - np.outer(q, q)


def concentration(q):
    q = np.asarray(q, dtype=np.float64)
    return np.sum(q * q, axis=-1)


def separation_force_trace(q):
    """Trace of the assignment covariance, ``1 - |q|^2``."""
    return 1.0 - concentration(q)
