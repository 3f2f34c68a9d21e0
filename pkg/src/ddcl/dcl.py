"""Dual competitive layer: prototypes as outputs ``P = X^T W2``.

Also carries the vanilla competitive layer quantization error (a baseline
measurement only) and the first/second-winner adjacency diagnostic.
"""

from dataclasses import dataclass

import numpy as np

from .numerics import pairwise_sq_dists


@dataclass
class DclState:
    """Prototype parameterization. ``mode`` is ``"direct"`` (free P) or ``"dual"`` (W2)."""

    mode: str
    P: np.ndarray = None
    w2: np.ndarray = None

    def __post_init__(self):
        if self.mode not in ("direct", "dual"):
            raise ValueError(f"prototype mode must be 'direct' or 'dual', got {self.mode!r}")
        if self.mode == "direct" and self.P is None:
            raise ValueError("direct mode needs an initial P")
        if self.mode == "dual" and self.w2 is None:
            raise ValueError("dual mode needs an initial w2")

    def prototypes(self, X):
        if self.mode == "direct":
            return self.P
        return dcl_forward(X, self.w2)


def dcl_forward(X, w2):
    X = np.asarray(X, float)
    w2 = np.asarray(w2, float)
    if X.shape[0] != w2.shape[0]:
        raise ValueError(f"X has {X.shape[0]} rows but w2 has {w2.shape[0]}")
    return X.T @ w2


def dcl_backward(X, w2, grad_P):
    """Return ``(grad_w2, grad_X)`` for ``P = X^T w2``."""
    X = np.asarray(X, float)
    w2 = np.asarray(w2, float)
    grad_P = np.asarray(grad_P, float)
    if grad_P.shape != (X.shape[1], w2.shape[1]):
        raise ValueError(f"grad_P shape {grad_P.shape} does not match P {(X.shape[1], w2.shape[1])}")
    return X @ grad_P, w2 @ grad_P.T


def vcl_quantization(X, W1):
    """Sum of nearest-prototype squared distances; ``W1`` holds prototypes as rows."""
    W1 = np.asarray(W1, float)
    X = np.atleast_2d(np.asarray(X, float))
    if X.shape[0] == 0:
        return 0.0
    return float(np.sum(np.min(pairwise_sq_dists(X, W1.T), axis=1)))


def winners(X, P):
    """First and second nearest prototype per sample (lowest index on ties)."""
    D = pairwise_sq_dists(X, P)
    order = np.argsort(D, axis=1, kind="stable")
    return order[:, 0], order[:, 1]


def chl_adjacency(X, P):
    P = np.asarray(P, float)
    k = P.shape[1]
    if k < 2:
        raise ValueError("adjacency needs k >= 2 prototypes")
    E = np.zeros((k, k), dtype=int)
    X = np.asarray(X, float)
    if X.size == 0:
        return E
    first, second = winners(np.atleast_2d(X), P)
    E[first, second] = 1
    E[second, first] = 1
    return E
