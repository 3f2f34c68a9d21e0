"""Scalar objectives.

Batch losses (``quantization_loss``, ``ols_loss``, ``variance_term``,
``total_loss``) are means over samples; the reduced ``energy`` sums its
quantization term over samples. Both normalizations are intentional.
"""

from dataclasses import asdict, dataclass, field

import numpy as np

from .numerics import pairwise_sq_dists
from .simplex import LOG_FLOOR, entropy


@dataclass(frozen=True)
class LossWeights:
    beta: float = 0.0
    gamma: float = 0.0
    eta: float = 0.0
    lam: float = 0.0
    # -1 rewards per-sample entropy (soft assignments), +1 penalizes it
    entropy_sign: int = -1

    def __post_init__(self):
        for name in ("beta", "gamma", "eta", "lam"):
            if getattr(self, name) < 0:
                raise ValueError(f"loss weight {name} must be >= 0, got {getattr(self, name)}")
        if self.entropy_sign not in (-1, 1):
            raise ValueError(f"entropy_sign must be +1 or -1, got {self.entropy_sign}")

    def coercive(self, k):
        """Whether the quadratic term dominates the separation term for k prototypes."""
        return self.lam > 0 and self.lam > self.eta * k * (k - 1)


@dataclass
class LossBreakdown:
    l_q: float
    l_ols: float
    v: float
    l_bal: float
    l_ent: float
    l_sep: float
    l_quad: float
    total: float

    def as_dict(self):
        return asdict(self)


@dataclass
class EnergyResult:
    value: float
    coercive: bool
    warnings: list = field(default_factory=list)

    def __float__(self):
        return self.value


def _check(Z, P, Q):
    Z = np.atleast_2d(np.asarray(Z, dtype=np.float64))
    P = np.asarray(P, dtype=np.float64)
    Q = np.atleast_2d(np.asarray(Q, dtype=np.float64))
    if Z.shape[0] == 0:
        raise ValueError("empty batch")
    if Q.shape[0] != Z.shape[0]:
        raise ValueError(f"{Z.shape[0]} samples but {Q.shape[0]} assignment vectors")
    if Q.shape[1] != P.shape[1] or Z.shape[1] != P.shape[0]:
        raise ValueError(f"shape mismatch: Z {Z.shape}, P {P.shape}, Q {Q.shape}")
    return Z, P, Q


def quantization_loss(Z, P, Q):
    Z, P, Q = _check(Z, P, Q)
    return float(np.mean(np.sum(Q * pairwise_sq_dists(Z, P), axis=1)))


def ols_loss(Z, P, Q):
    Z, P, Q = _check(Z, P, Q)
    R = Z - Q @ P.T
    return float(np.mean(np.einsum("nd,nd->n", R, R)))


def variance_per_sample(P, Q):
    """Weighted prototype variance ``sum_j q_j |p_j - P q|^2`` for every row of Q."""
    P = np.asarray(P, dtype=np.float64)
    Q = np.atleast_2d(np.asarray(Q, dtype=np.float64))
    mix = Q @ P.T
    out = np.zeros(Q.shape[0])
    for j in range(P.shape[1]):
        diff = P[:, j] - mix
        out += Q[:, j] * np.einsum("nd,nd->n", diff, diff)
    return out


def variance_term(P, Q):
    return float(np.mean(variance_per_sample(P, Q)))


def separation_sum(P):
    """``sum_{i<j} |p_i - p_j|^2`` via ``k |P|_F^2 - |P 1|^2``."""
    P = np.asarray(P, dtype=np.float64)
    k = P.shape[1]
    s = P.sum(axis=1)
    return float(max(k * np.sum(P * P) - np.dot(s, s), 0.0))


def regularizers(P, Q):
    """Return ``(l_bal, l_ent, l_sep)``."""
    Q = np.atleast_2d(np.asarray(Q, dtype=np.float64))
    qbar = Q.mean(axis=0)
    k = Q.shape[1]
    l_bal = float(max(np.sum(qbar * np.log(np.maximum(qbar, LOG_FLOOR))) + np.log(k), 0.0))
    l_ent = float(np.mean(entropy(Q)))
    l_sep = -separation_sum(P)
    return l_bal, l_ent, l_sep


def total_loss(Z, P, Q, weights=LossWeights(), base="lq"):
    """Full training objective with the regularizers weighted by ``weights``.

    ``base`` selects the data term: ``"lq"`` (soft quantization) or ``"lols"``.
    """
    if base not in ("lq", "lols"):
        raise ValueError(f"unknown base loss {base!r}")
    l_q = quantization_loss(Z, P, Q)
    l_ols = ols_loss(Z, P, Q)
    v = variance_term(P, Q)
    l_bal, l_ent, l_sep = regularizers(P, Q)
    l_quad = 0.5 * weights.lam * float(np.sum(np.asarray(P) ** 2))
    data = l_q if base == "lq" else l_ols
    total = (
        data
        + weights.beta * l_bal
        + weights.entropy_sign * weights.gamma * l_ent
        + weights.eta * l_sep
        + l_quad
    )
    return LossBreakdown(l_q, l_ols, v, l_bal, l_ent, l_sep, l_quad, float(total))


def energy_value(Z, P, Q, weights):
    Z, P, Q = _check(Z, P, Q)
    quant = float(np.sum(Q * pairwise_sq_dists(Z, P)))
    l_bal, l_ent, l_sep = regularizers(P, Q)
    return (
        quant
        + weights.beta * l_bal
        + weights.entropy_sign * weights.gamma * l_ent
        + weights.eta * l_sep
        + 0.5 * weights.lam * float(np.sum(P * P))
    )


def energy(Z, P, Q, weights):
    """Reduced frozen-feature energy (quantization summed over samples)."""
    k = np.asarray(P).shape[1]
    value = energy_value(Z, P, Q, weights)
    coercive = weights.coercive(k)
    warnings = []
    if not coercive:
        warnings.append(
            f"coercivity violated: need lam > eta*k*(k-1) = {weights.eta * k * (k - 1):.6g}, got lam={weights.lam:.6g}"
        )
    return EnergyResult(value, coercive, warnings)


def log_softmax(logits):
    logits = np.atleast_2d(np.asarray(logits, dtype=np.float64))
    m = logits.max(axis=1, keepdims=True)
    return logits - m - np.log(np.sum(np.exp(logits - m), axis=1, keepdims=True))


def soft_cross_entropy(logits, Q_target):
    logp = np.maximum(log_softmax(logits), np.log(LOG_FLOOR))
    Q_target = np.atleast_2d(np.asarray(Q_target, dtype=np.float64))
    return float(-np.mean(np.sum(Q_target * logp, axis=1)))
