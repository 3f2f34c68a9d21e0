"""Probability simplex geometry: Euclidean projection, entropy, KL to uniform."""

import numpy as np

SNAP = 1e-15
LOG_FLOOR = 1e-30


def project(v):
    """Euclidean projection of a vector onto the probability simplex.

    Sort-and-threshold construction, O(k log k): sort descending, find the
    largest rho with ``v_(rho) - (cumsum_rho - 1) / rho > 0``, shift by that
    threshold and clip at zero.
    """
    v = np.asarray(v, dtype=np.float64)
    if v.ndim != 1 or v.size < 1:
        raise ValueError(f"project expects a non-empty 1-D vector, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError("project: non-finite entries")
    # stable sort of -v gives descending order with index tie-break
    u = v[np.argsort(-v, kind="stable")]
    css = np.cumsum(u) - 1.0
    ranks = np.arange(1, v.size + 1)
    rho = np.nonzero(u - css / ranks > 0)[0][-1] + 1
    theta = css[rho - 1] / rho
    q = np.maximum(v - theta, 0.0)
    q[q < SNAP] = 0.0
    return q


def project_rows(V):
    """Row-wise :func:`project` for an ``(n, k)`` array."""
    V = np.asarray(V, dtype=np.float64)
    if V.ndim != 2 or V.shape[1] < 1:
        raise ValueError(f"project_rows expects (n, k>=1), got shape {V.shape}")
    if not np.all(np.isfinite(V)):
        raise ValueError("project_rows: non-finite entries")
    n, k = V.shape
    U = np.take_along_axis(V, np.argsort(-V, axis=1, kind="stable"), axis=1)
    css = np.cumsum(U, axis=1) - 1.0
    ranks = np.arange(1, k + 1)
    cond = U - css / ranks > 0
    rho = k - np.argmax(cond[:, ::-1], axis=1)
    theta = css[np.arange(n), rho - 1] / rho
    Q = np.maximum(V - theta[:, None], 0.0)
    Q[Q < SNAP] = 0.0
    return Q


def is_feasible(q, tol=1e-9):
    q = np.asarray(q, dtype=np.float64)
    return bool(np.all(q >= 0.0) and np.all(np.abs(q.sum(axis=-1) - 1.0) <= tol))


def _xlogx(q):
    return q * np.log(np.maximum(q, LOG_FLOOR))


def entropy(q):
    """Shannon entropy in nats; works on a vector or row-wise on a matrix."""
    q = np.asarray(q, dtype=np.float64)
    return -np.sum(_xlogx(q), axis=-1)


def kl_to_uniform(q):
    q = np.asarray(q, dtype=np.float64)
    return np.maximum(np.log(q.shape[-1]) - entropy(q), 0.0)
