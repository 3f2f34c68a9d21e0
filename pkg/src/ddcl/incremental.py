"""Streaming DDCL: one prototype update per arriving batch, then Widrow-Hoff
refinement of each sample's assignment over its feature coordinates."""

import csv
import logging
from dataclasses import dataclass, field

import numpy as np

from .assignment import concentration, soft_assign_batch
from .metrics import evaluate
from .numerics import as_matrix, make_rng, pairwise_sq_dists
from .simplex import project, project_rows
from .trainer import TRACE_COLUMNS, _fmt, anneal, separation

log = logging.getLogger(__name__)

FEAS_TOL = 1e-9


def widrow_hoff_step(q_prev, r, z_t, mu):
    """LMS update of ``q`` toward predicting scalar ``z_t`` from row ``r``, then projection."""
    if not mu > 0:
        raise ValueError(f"step size must be > 0, got {mu}")
    q_prev = np.asarray(q_prev, float)
    r = np.asarray(r, float)
    e = z_t - float(r @ q_prev)
    return project(q_prev + mu * e * r)


def incremental_objective(Z, P, Q_per_t, alpha):
    """``sum_t alpha_t L_t`` with ``L_t`` the mean reconstruction error of the
    first t coordinates using the assignments held after step t.

    ``Q_per_t`` has shape (d, n, k); entry t-1 is the assignment after step t.
    """
    Z = as_matrix(Z, "Z")
    P = np.asarray(P, float)
    alpha = np.asarray(alpha, float)
    Q_per_t = np.asarray(Q_per_t, float)
    d = Z.shape[1]
    if alpha.shape != (d,):
        raise ValueError(f"alpha must have length d={d}")
    if np.any(alpha < 0):
        raise ValueError("alpha weights must be >= 0")
    total = 0.0
    for t in range(1, d + 1):
        if alpha[t - 1] == 0:
            continue
        R = Z[:, :t] - Q_per_t[t - 1] @ P[:t].T
        total += alpha[t - 1] * float(np.mean(np.sum(R * R, axis=1)))
    return total


def default_alpha(d):
    return np.arange(1, d + 1) / d


@dataclass
class StreamConfig:
    k: int = 10
    batch_size: int = 50
    T0: float = 1.0
    T_min: float = 1.0
    tau: float = 10.0
    lr: float = 0.5
    mu: float = 0.05
    mode: str = "gradient"
    init_shrink: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.mode not in ("gradient", "rowwise"):
            raise ValueError(f"stream mode must be gradient or rowwise, got {self.mode!r}")
        if self.batch_size < 1 or self.k < 1:
            raise ValueError("batch_size and k must be >= 1")
        if not (self.T0 >= self.T_min > 0 and self.tau > 0 and self.lr > 0 and self.mu > 0):
            raise ValueError("invalid stream schedule")
        if not 0 < self.init_shrink <= 1:
            raise ValueError("init_shrink must lie in (0, 1]")


@dataclass
class StreamState:
    P: np.ndarray
    mass: np.ndarray
    step: int = 0
    T: float = 1.0
    mu: float = 0.05


@dataclass
class StreamResult:
    P: np.ndarray
    labels: np.ndarray
    Q_refined: np.ndarray
    rows: list = field(default_factory=list)
    feasibility_violations: int = 0
    wh_steps: int = 0
    mu_halvings: int = 0
    skipped_batches: int = 0
    consumed: np.ndarray = None

    def column(self, name):
        return np.array([r[name] for r in self.rows], dtype=float)

    def to_csv(self, path):
        cols = TRACE_COLUMNS + ["samples_seen"]
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(cols)
            for r in self.rows:
                w.writerow(["" if r.get(c) is None else _fmt(r[c]) for c in cols])


def batches_of(Z, B):
    """Split an array into consecutive single-pass batches of size B (last may be short)."""
    Z = np.asarray(Z, float)
    return [Z[i:i + B] for i in range(0, Z.shape[0], B)]


def _wh_sweep(Q, Zb, P, mu):
    """Row-wise Widrow-Hoff over coordinates t=1..d for every sample in the batch."""
    violations = halvings = 0
    for t in range(Zb.shape[1]):
        r = P[t]
        e = Zb[:, t] - Q @ r
        Qt = Q + mu * e[:, None] * r[None, :]
        Qn = project_rows(Qt)
        if np.max(np.abs(Qn - Qt)) > 0.5:
            mu *= 0.5
            halvings += 1
        bad = (np.abs(Qn.sum(axis=1) - 1.0) > FEAS_TOL) | (Qn.min(axis=1) < 0)
        violations += int(bad.sum())
        Q = Qn
    return Q, mu, violations, halvings


def stream_train(stream, config, labels=None):
    """Single pass over ``stream``, a list of (B, d) batches in arrival order.

    ``labels`` (optional) are aligned with the concatenated stream and only
    feed the per-batch metric columns.
    """
    cfg = config
    rng = make_rng(cfg.seed)
    batches = [np.atleast_2d(np.asarray(b, float)) for b in stream]
    state = None
    seen = []
    rows = []
    refined = []
    res = StreamResult(None, None, None)
    first_t = 0
    for bi, Zb in enumerate(batches):
        if Zb.size == 0 or Zb.shape[0] < 1:
            log.warning("skipping empty batch %d", bi)
            res.skipped_batches += 1
            continue
        if not np.all(np.isfinite(Zb)):
            raise ValueError(f"batch {bi} contains NaN or Inf")
        if state is None:
            if Zb.shape[0] < cfg.k:
                raise ValueError(f"first batch has {Zb.shape[0]} samples, fewer than k={cfg.k}")
            idx = rng.choice(Zb.shape[0], size=cfg.k, replace=False)
            center = Zb.mean(axis=0)
            P0 = center[:, None] + cfg.init_shrink * (Zb[idx].T - center[:, None])
            state = StreamState(P0, np.zeros(cfg.k), 0, cfg.T0, cfg.mu)
            first_t = bi
        state.T = anneal(cfg.T0, cfg.T_min, cfg.tau, bi - first_t)
        Q, _ = soft_assign_batch(Zb, state.P, state.T)
        if cfg.mode == "gradient":
            grad = (2.0 / Zb.shape[0]) * (state.P * Q.sum(axis=0) - Zb.T @ Q)
            state.P = state.P - cfg.lr * grad
        else:
            m = Q.sum(axis=0)
            W2 = Q / np.maximum(m, 1e-300)
            newP = state.P.copy()
            for t in range(Zb.shape[1]):
                r_t = Zb[:, t] @ W2
                newP[t] = (state.mass * state.P[t] + m * r_t) / np.maximum(state.mass + m, 1e-300)
            state.P = newP
            state.mass = state.mass + m
        Qr, state.mu, viol, halv = _wh_sweep(Q, Zb, state.P, state.mu)
        res.feasibility_violations += viol
        res.mu_halvings += halv
        res.wh_steps += Zb.shape[0] * Zb.shape[1]
        if halv:
            log.info("batch %d: Widrow-Hoff step halved %d time(s), mu=%g", bi, halv, state.mu)
        refined.append(Qr)
        seen.append(Zb)
        state.step += 1

        Zs = np.vstack(seen)
        D = pairwise_sq_dists(Zs, state.P)
        Qs, _ = soft_assign_batch(Zs, state.P, state.T)
        K = concentration(Qs)
        row = {"epoch": state.step, "T": state.T, "samples_seen": Zs.shape[0],
               "s": separation(state.P) if cfg.k > 1 else 0.0,
               "l_q": float(np.mean(np.sum(Qs * D, axis=1))),
               "l_ols": float(np.mean(np.sum((Zs - Qs @ state.P.T) ** 2, axis=1))),
               "k_mean": float(K.mean()), "i_mean": float(1 - K.mean()),
               "acc": None, "nmi": None, "ari": None}
        row["v"] = row["l_q"] - row["l_ols"]
        row["grad_pv_norm"] = float(np.linalg.norm(
            2.0 * state.P @ (np.diag(Qs.mean(axis=0)) - Qs.T @ Qs / Qs.shape[0])))
        if labels is not None:
            row.update(evaluate(np.asarray(labels)[:Zs.shape[0]], np.argmin(D, axis=1)))
        rows.append(row)

    if state is None:
        raise ValueError("stream contained no samples")
    Zall = np.vstack(seen)
    res.P = state.P
    res.labels = np.argmin(pairwise_sq_dists(Zall, state.P), axis=1)
    res.Q_refined = np.vstack(refined)
    res.rows = rows
    res.consumed = np.arange(Zall.shape[0])
    return res
