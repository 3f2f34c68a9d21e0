"""Projected gradient descent on the frozen-feature energy E(P, Q).

Each step moves P along -grad_P E and every q_n along -grad_{q_n} E followed
by a Euclidean projection onto the simplex. Any step that would raise the
energy is retried with both step sizes halved, so accepted steps never
increase E.
"""

import json
from dataclasses import asdict, dataclass, field

import numpy as np

from .assignment import soft_assign_batch
from .gradients import sep_grad
from .losses import LossWeights, energy, energy_value
from .numerics import as_matrix, frobenius_norm, make_rng, pairwise_sq_dists
from .simplex import LOG_FLOOR, project_rows


def energy_grads(Z, P, Q, weights):
    """Return ``(grad_P, grad_Q)`` of the energy (quantization summed over samples)."""
    Z = as_matrix(Z, "Z")
    P = np.asarray(P, float)
    Q = np.asarray(Q, float)
    n = Z.shape[0]
    gP = 2.0 * (P * Q.sum(axis=0) - Z.T @ Q)
    if weights.eta:
        gP = gP + weights.eta * sep_grad(P)
    if weights.lam:
        gP = gP + weights.lam * P
    gQ = pairwise_sq_dists(Z, P)
    if weights.beta:
        qbar = Q.mean(axis=0)
        gQ = gQ + (weights.beta / n) * (np.log(np.maximum(qbar, LOG_FLOOR)) + 1.0)[None, :]
    if weights.gamma:
        gQ = gQ - (weights.entropy_sign * weights.gamma / n) * (np.log(np.maximum(Q, LOG_FLOOR)) + 1.0)
    return gP, gQ


def _finite(name, a):
    if not np.all(np.isfinite(a)):
        raise FloatingPointError(f"non-finite {name} in flow step")


def flow_step(Z, P, Q, weights, step_P, step_q):
    if step_P < 0 or step_q < 0:
        raise ValueError("step sizes must be >= 0")
    gP, gQ = energy_grads(Z, P, Q, weights)
    _finite("grad_P", gP)
    _finite("grad_Q", gQ)
    P_new = P - step_P * gP
    Q_new = project_rows(Q - step_q * gQ) if step_q > 0 else np.array(Q, float)
    return P_new, Q_new


def kkt_residual(Z, P, Q, weights, probe_step=1e-5):
    if not 0 < probe_step <= 1e-4:
        raise ValueError(f"probe_step must lie in (0, 1e-4], got {probe_step}")
    gP, gQ = energy_grads(Z, P, Q, weights)
    Q = np.asarray(Q, float)
    moved = project_rows(Q - probe_step * gQ) - Q
    return frobenius_norm(gP) + float(np.sum(np.linalg.norm(moved, axis=1))) / probe_step


@dataclass
class FlowCertificate:
    energies: list
    max_increase: float
    kkt_initial: float
    kkt_final: float
    bounded: bool
    max_norm: float
    steps: int
    backtracks: int
    coercive: bool
    c1: float
    c2: float
    sublevel_ok: bool
    warnings: list = field(default_factory=list)

    def to_dict(self, with_series=False):
        d = asdict(self)
        if not with_series:
            d.pop("energies")
            d["energy_initial"] = self.energies[0]
            d["energy_final"] = self.energies[-1]
        return d

    def to_json(self, path=None, with_series=False):
        text = json.dumps(self.to_dict(with_series), indent=2)
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text + "\n")
        return text


def flow_init(Z, k, seed=0, T=1.0):
    """Prototypes at k distinct samples; assignments soft at temperature T."""
    Z = as_matrix(Z, "Z")
    rng = make_rng(seed)
    idx = rng.choice(Z.shape[0], size=k, replace=False)
    P = Z[idx].T.copy()
    Q, _ = soft_assign_batch(Z, P, T)
    return P, Q


def run_flow(Z, init, weights=LossWeights(0.1, 0.1, 0.01, 1.0), steps=2000,
             step_P=2e-3, step_q=1e-2, norm_cap=1e6, probe_step=1e-5, max_halvings=60):
    """Iterate backtracked flow steps from ``init = (P0, Q0)``.

    Returns ``(certificate, P_final, Q_final)``.
    """
    Z = as_matrix(Z, "Z")
    P, Q = (np.array(a, float) for a in init)
    k = P.shape[1]
    e0 = energy(Z, P, Q, weights)
    warnings = list(e0.warnings)
    E = e0.value
    energies = [E]
    kkt0 = kkt_residual(Z, P, Q, weights, probe_step)
    max_inc = -np.inf
    max_norm = frobenius_norm(P)
    bounded = True
    backtracks = 0
    sP, sq = step_P, step_q
    # E >= c1 |P|^2 - c2 since sum_{i<j} |p_i - p_j|^2 <= k |P|^2 and entropy <= log k
    c1 = 0.5 * weights.lam - weights.eta * k
    c2 = weights.gamma * np.log(k) if weights.entropy_sign < 0 else 0.0
    sublevel_ok = c1 * max_norm ** 2 - c2 <= E + 1e-9
    for _ in range(steps):
        if sP == 0 and sq == 0:
            energies.append(E)
            max_inc = max(max_inc, 0.0)
            continue
        a, b = sP, sq
        for _h in range(max_halvings + 1):
            P1, Q1 = flow_step(Z, P, Q, weights, a, b)
            E1 = energy_value(Z, P1, Q1, weights)
            if np.isfinite(E1) and E1 <= E:
                break
            a, b = a * 0.5, b * 0.5
            backtracks += 1
        else:
            # no decrease reachable at resolution; stay put
            P1, Q1, E1 = P, Q, E
        max_inc = max(max_inc, E1 - E)
        P, Q, E = P1, Q1, E1
        # let the step recover after backtracking, never beyond the configured size
        sP, sq = min(a * 1.25, step_P), min(b * 1.25, step_q)
        energies.append(E)
        nrm = frobenius_norm(P)
        max_norm = max(max_norm, nrm)
        sublevel_ok = sublevel_ok and c1 * nrm ** 2 - c2 <= E + 1e-9
        if not np.isfinite(nrm) or nrm > norm_cap:
            bounded = False
            warnings.append(f"|P|_F exceeded cap {norm_cap:g}")
            break
    return FlowCertificate(
        energies=[float(e) for e in energies],
        max_increase=float(max_inc if np.isfinite(max_inc) else 0.0),
        kkt_initial=float(kkt0),
        kkt_final=float(kkt_residual(Z, P, Q, weights, probe_step)),
        bounded=bounded,
        max_norm=float(max_norm),
        steps=len(energies) - 1,
        backtracks=backtracks,
        coercive=e0.coercive,
        c1=float(c1), c2=float(c2),
        sublevel_ok=bool(sublevel_ok),
        warnings=warnings,
    ), P, Q
