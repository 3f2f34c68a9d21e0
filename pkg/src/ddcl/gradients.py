"""Hand-derived gradients of the DDCL losses and a finite-difference checker.

Single-sample forms (``grad_q``, ``grad_P``, ``grad_z``) follow the closed
expressions for one feature vector ``z``; :func:`objective_grads` is the
batch version the trainers use. With ``stop_gradient=True`` the soft
assignments are treated as constants, so terms that depend on Q alone
(balance, entropy) contribute no gradient.
"""

from dataclasses import dataclass

import numpy as np

from .assignment import sigma, soft_assign, soft_assign_batch
from .losses import LossBreakdown, LossWeights, separation_sum, variance_per_sample
from .simplex import LOG_FLOOR, entropy

_Q_KINDS = ("lq", "lols", "v")
_P_KINDS = ("lq", "lols", "v", "lsep", "quad")


def _kind(kind, allowed):
    k = str(kind).lower().replace("_", "")
    if k not in allowed:
        raise ValueError(f"unknown loss kind {kind!r}; expected one of {allowed}")
    return k


def grad_q(kind, z, P, q):
    kind = _kind(kind, _Q_KINDS)
    z, P, q = np.asarray(z, float), np.asarray(P, float), np.asarray(q, float)
    if kind == "lq":
        diff = z[:, None] - P
        return np.sum(diff * diff, axis=0)
    mix = P @ q
    if kind == "lols":
        return 2.0 * P.T @ (mix - z)
    return np.sum(P * P, axis=0) - 2.0 * P.T @ mix


def sep_grad(P):
    """Gradient of ``-sum_{i<j} |p_i - p_j|^2``; column j is ``-2 (k p_j - sum_i p_i)``."""
    P = np.asarray(P, float)
    k = P.shape[1]
    return -2.0 * (k * P - P.sum(axis=1, keepdims=True))


def grad_P(kind, z, P, q, weights=None):
    kind = _kind(kind, _P_KINDS)
    z, P, q = np.asarray(z, float), np.asarray(P, float), np.asarray(q, float)
    if kind == "lq":
        return 2.0 * (P - z[:, None]) * q[None, :]
    if kind == "lols":
        return 2.0 * np.outer(P @ q - z, q)
    if kind == "v":
        return 2.0 * P @ sigma(q)
    if kind == "lsep":
        return sep_grad(P)
    lam = 1.0 if weights is None else weights.lam
    return lam * P


def grad_z(kind, z, P, T, stop_gradient=True):
    """Gradient w.r.t. the feature vector, with q = soft_assign(z, P, T).

    Without stop-gradient the softmax Jacobian adds
    ``-(2/T) M^T Sigma_q g`` where ``M`` has rows ``z - p_j`` and ``g`` is
    the loss gradient w.r.t. q.
    """
    kind = _kind(kind, _Q_KINDS)
    z, P = np.asarray(z, float), np.asarray(P, float)
    q = soft_assign(z, P, T)
    # V has no explicit z dependence; only the path through q remains
    direct = np.zeros_like(z) if kind == "v" else 2.0 * (z - P @ q)
    if stop_gradient:
        return direct
    g = grad_q(kind, z, P, q)
    M = z[None, :] - P.T
    return direct - (2.0 / T) * M.T @ (sigma(q) @ g)


def separating_component(G, i, j, u):
    """Component of a prototype gradient along the split direction ``(+u on i, -u on j)``."""
    G = np.asarray(G, float)
    return float(np.dot(G[:, i] - G[:, j], u))


@dataclass
class ObjectiveGrads:
    breakdown: LossBreakdown
    Q: np.ndarray
    D: np.ndarray
    grad_P: np.ndarray
    grad_Z: np.ndarray


def objective_grads(Z, P, T, weights=LossWeights(), base="lq", stop_gradient=True):
    """Batch objective (mean over samples) and its gradients w.r.t. P and Z."""
    if base not in ("lq", "lols"):
        raise ValueError(f"unknown base loss {base!r}")
    Z = np.asarray(Z, float)
    P = np.asarray(P, float)
    n, k = Z.shape[0], P.shape[1]
    Q, D = soft_assign_batch(Z, P, T)
    mix = Q @ P.T
    R = mix - Z

    l_q = float(np.mean(np.sum(Q * D, axis=1)))
    l_ols = float(np.mean(np.einsum("nd,nd->n", R, R)))
    v = float(np.mean(variance_per_sample(P, Q)))
    qbar = Q.mean(axis=0)
    l_bal = float(max(np.sum(qbar * np.log(np.maximum(qbar, LOG_FLOOR))) + np.log(k), 0.0))
    l_ent = float(np.mean(entropy(Q)))
    l_sep = -separation_sum(P)
    l_quad = 0.5 * weights.lam * float(np.sum(P * P))
    data = l_q if base == "lq" else l_ols
    total = (
        data
        + weights.beta * l_bal
        + weights.entropy_sign * weights.gamma * l_ent
        + weights.eta * l_sep
        + l_quad
    )
    bd = LossBreakdown(l_q, l_ols, v, l_bal, l_ent, l_sep, l_quad, float(total))

    if base == "lq":
        gP = (2.0 / n) * (P * Q.sum(axis=0) - Z.T @ Q)
        gZ = (2.0 / n) * (-R)
        gQ = D / n
    else:
        gP = (2.0 / n) * (R.T @ Q)
        gZ = (2.0 / n) * (-R)
        gQ = (2.0 / n) * (R @ P)
    if weights.eta:
        gP = gP + weights.eta * sep_grad(P)
    if weights.lam:
        gP = gP + weights.lam * P

    if not stop_gradient:
        if weights.beta:
            gQ = gQ + weights.beta / n * (np.log(np.maximum(qbar, LOG_FLOOR)) + 1.0)[None, :]
        if weights.gamma:
            gQ = gQ - weights.entropy_sign * weights.gamma / n * (np.log(np.maximum(Q, LOG_FLOOR)) + 1.0)
        gA = Q * (gQ - np.sum(Q * gQ, axis=1, keepdims=True))
        gD = -gA / T
        gZ = gZ + 2.0 * (gD.sum(axis=1)[:, None] * Z - gD @ P.T)
        gP = gP + 2.0 * (P * gD.sum(axis=0) - Z.T @ gD)

    return ObjectiveGrads(bd, Q, D, gP, gZ)


@dataclass
class GradReport:
    analytic: np.ndarray
    numeric: np.ndarray
    max_rel_err: float
    max_abs_err: float


def numeric_grad(loss, point, h=1e-5):
    point = np.array(point, dtype=float)
    g = np.zeros_like(point)
    flat = point.reshape(-1)
    gflat = g.reshape(-1)
    for i in range(flat.size):
        old = flat[i]
        flat[i] = old + h
        fp = loss(point)
        flat[i] = old - h
        fm = loss(point)
        flat[i] = old
        gflat[i] = (fp - fm) / (2.0 * h)
    return g


def finite_diff_check(loss, point, grad, h=1e-5, floor=1e-10):
    """Compare an analytic gradient against central differences of ``loss``.

    ``grad`` is either the analytic gradient array or a callable returning it.
    Relative errors use ``max(|analytic|, |numeric|, floor)`` per entry.
    """
    if not 1e-8 <= h <= 1e-2:
        raise ValueError(f"finite-difference step must lie in [1e-8, 1e-2], got {h}")
    point = np.asarray(point, dtype=float)
    analytic = np.asarray(grad(point) if callable(grad) else grad, dtype=float)
    numeric = numeric_grad(loss, point, h)
    if analytic.shape != numeric.shape:
        raise ValueError(f"gradient shape {analytic.shape} != point shape {numeric.shape}")
    abs_err = np.abs(analytic - numeric)
    denom = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), floor)
    return GradReport(analytic, numeric, float(np.max(abs_err / denom)), float(np.max(abs_err)))
