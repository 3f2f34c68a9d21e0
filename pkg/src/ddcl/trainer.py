"""Batch DDCL training loop with annealing and per-epoch diagnostics."""

import csv
import json
import math
from dataclasses import asdict, dataclass, field, fields, replace

import numpy as np

from .assignment import concentration, soft_assign_batch
from .backbone import jacobian_norm_estimate, mlp_backward, mlp_forward, sgd_step
from .dcl import DclState, dcl_backward, dcl_forward
from .gradients import objective_grads
from .losses import LossWeights, log_softmax, variance_per_sample
from .metrics import evaluate
from .numerics import as_matrix, frobenius_norm, make_rng, pearson_corr

TRACE_COLUMNS = ["epoch", "T", "l_q", "l_ols", "v", "s", "k_mean", "i_mean",
                 "grad_pv_norm", "acc", "nmi", "ari"]
V_SLACK = 1e-12


class NumericalAbort(RuntimeError):
    """Raised when a loss term or gradient becomes NaN or infinite."""

    def __init__(self, term, epoch):
        super().__init__(f"non-finite value in {term} at epoch {epoch}")
        self.term = term
        self.epoch = epoch


@dataclass
class RunConfig:
    k: int = 2
    T0: float = 1.0
    T_min: float = 1.0
    tau: float = 80.0
    beta: float = 0.0
    gamma: float = 0.0
    eta: float = 0.0
    eta_ramp_epochs: int = 0
    lam: float = 0.0
    lr_backbone: float = 0.01
    lr_dcl: float = 0.1
    epochs: int = 200
    seed: int = 0
    stop_gradient: bool = True
    loss_kind: str = "lq"
    prototype_mode: str = "direct"
    entropy_sign: int = -1
    batch_size: int = 0
    lyapunov_check: bool = False
    margin_every: int = 0
    init: str = "sample"
    # each entry: {"epoch": e, <field>: value, ...}, applied at the start of epoch e
    phases: list = field(default_factory=list)

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if not (self.T0 >= self.T_min > 0):
            raise ValueError(f"need T0 >= T_min > 0, got T0={self.T0}, T_min={self.T_min}")
        if not self.tau > 0:
            raise ValueError(f"tau must be > 0, got {self.tau}")
        if not (self.lr_backbone > 0 and self.lr_dcl > 0):
            raise ValueError("learning rates must be > 0")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.loss_kind not in ("lq", "lols", "softce"):
            raise ValueError(f"loss_kind must be lq, lols or softce, got {self.loss_kind!r}")
        if self.prototype_mode not in ("direct", "dual"):
            raise ValueError(f"prototype_mode must be direct or dual, got {self.prototype_mode!r}")
        if self.prototype_mode == "dual" and self.batch_size:
            raise ValueError("dual prototype mode ties w2 rows to samples and needs full-batch training")
        if self.init not in ("sample", "plusplus"):
            raise ValueError(f"init must be sample or plusplus, got {self.init!r}")
        if self.batch_size < 0:
            raise ValueError("batch_size must be >= 0 (0 = full batch)")
        self.weights(self.eta)
        if self.lyapunov_check and not self.lam > self.eta * self.k * (self.k - 1):
            raise ValueError(
                f"lyapunov_check needs lam > eta*k*(k-1) = {self.eta * self.k * (self.k - 1):.6g}, got lam={self.lam}"
            )

    def weights(self, eta=None):
        return LossWeights(self.beta, self.gamma, self.eta if eta is None else eta,
                           self.lam, self.entropy_sign)

    def eta_at(self, epoch):
        if self.eta_ramp_epochs <= 0:
            return self.eta
        return self.eta * min(1.0, epoch / self.eta_ramp_epochs)

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(d) - known)
        if unknown:
            raise ValueError(f"unknown config keys: {', '.join(unknown)}")
        return cls(**d)

    def save(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


@dataclass
class TrainTrace:
    rows: list = field(default_factory=list)
    v_violations: int = 0
    s_initial: float = float("nan")
    margins: list = field(default_factory=list)

    def column(self, name):
        return np.array([r[name] for r in self.rows], dtype=float)

    def to_csv(self, path, extra=()):
        cols = TRACE_COLUMNS + list(extra)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(cols)
            for r in self.rows:
                w.writerow(["" if r.get(c) is None else _fmt(r[c]) for c in cols])


def _fmt(v):
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


@dataclass
class CollapseVerdict:
    collapsed: bool
    final_S: float
    threshold: float


@dataclass
class TrainResult:
    P: np.ndarray
    Q: np.ndarray
    labels: np.ndarray
    trace: TrainTrace
    state: DclState = None
    backbone: object = None
    P_init: np.ndarray = None


def anneal(T0, T_min, tau, epoch):
    return max(T0 * math.exp(-epoch / tau), T_min)


def separation(P):
    """Mean pairwise squared distance between prototype columns."""
    P = np.asarray(P, float)
    k = P.shape[1]
    if k < 2:
        raise ValueError("separation needs k >= 2")
    s = P.sum(axis=1)
    total = max(k * float(np.sum(P * P)) - float(s @ s), 0.0)
    return total / (k * (k - 1) / 2)


def detect_collapse(trace, P_init, P_final):
    if trace is not None and not trace.rows:
        raise ValueError("empty trace")
    s0 = separation(P_init)
    s1 = separation(P_final)
    thr = max(1e-6, 1e-3 * s0)
    return CollapseVerdict(bool(s1 < thr), s1, thr)


def feedback_correlation(trace):
    if len(trace.rows) < 3:
        raise ValueError("feedback correlation needs at least 3 epochs")
    return pearson_corr(trace.column("s"), trace.column("k_mean"))


def stability_margin(P, T, jacobian_norm, lr_backbone=1.0, lr_dcl=1.0):
    """Return ``(ratio_bound, current_ratio, ok)`` for the backbone/DCL learning-rate ratio."""
    if not T > 0:
        raise ValueError("T must be > 0")
    ratio = lr_backbone / lr_dcl
    if jacobian_norm <= 0:
        return math.inf, ratio, True
    bound = 1.0 + 4.0 * frobenius_norm(P) / (T * jacobian_norm)
    return bound, ratio, bool(ratio < bound)


def _features(backbone, X, mode="train", update_running=True):
    if backbone is None:
        return X, None
    return mlp_forward(backbone, X, mode=mode, update_running=update_running)


def _check_finite(bd, grads, epoch):
    for name, val in bd.as_dict().items():
        if not np.isfinite(val):
            raise NumericalAbort(name, epoch)
    for name, g in grads:
        if not np.all(np.isfinite(g)):
            raise NumericalAbort(name, epoch)


def _diagnostics(F, P, T, y, epoch):
    Q, D = soft_assign_batch(F, P, T)
    R = F - Q @ P.T
    vs = variance_per_sample(P, Q)
    K = concentration(Q)
    n = F.shape[0]
    gpv = 2.0 * P @ (np.diag(Q.mean(axis=0)) - Q.T @ Q / n)
    row = {
        "epoch": epoch, "T": T,
        "l_q": float(np.mean(np.sum(Q * D, axis=1))),
        "l_ols": float(np.mean(np.einsum("nd,nd->n", R, R))),
        "v": float(np.mean(vs)),
        "s": separation(P) if P.shape[1] > 1 else 0.0,
        "k_mean": float(K.mean()), "i_mean": float(1.0 - K.mean()),
        "grad_pv_norm": frobenius_norm(gpv),
        "acc": None, "nmi": None, "ari": None,
    }
    labels = np.argmin(D, axis=1)
    if y is not None:
        row.update(evaluate(y, labels))
    return row, Q, labels, int(np.sum(vs < -V_SLACK))


def _init_prototypes(F, k, rng, scheme="sample"):
    """Indices of k distinct samples, uniform or with squared-distance weights."""
    n = F.shape[0]
    if n < k:
        raise ValueError(f"need n >= k samples, got n={n}, k={k}")
    if scheme == "sample":
        return rng.choice(n, size=k, replace=False)
    idx = [int(rng.integers(n))]
    dmin = np.sum((F - F[idx[0]]) ** 2, axis=1)
    for _ in range(1, k):
        w = dmin.copy()
        w[idx] = 0.0
        if w.sum() <= 0:
            rest = np.setdiff1d(np.arange(n), idx)
            j = int(rng.choice(rest))
        else:
            j = int(rng.choice(n, p=w / w.sum()))
        idx.append(j)
        dmin = np.minimum(dmin, np.sum((F - F[j]) ** 2, axis=1))
    return np.array(idx)


def train(X, config, labels=None, backbone=None, init_P=None):
    """Run batch DDCL on data ``X`` (n, d_in).

    Without a backbone the data are the features. ``loss_kind="softce"`` adds
    a linear head trained by soft cross-entropy toward the (detached) soft
    assignments; its gradient reaches the backbone, while prototypes follow
    the quantization loss.
    """
    X = as_matrix(X, "X")
    cfg = replace(config)
    cfg.validate()
    n = X.shape[0]
    if n < cfg.k:
        raise ValueError(f"need n >= k samples, got n={n}, k={cfg.k}")
    if labels is not None:
        labels = np.asarray(labels)
        if labels.shape[0] != n:
            raise ValueError("labels length does not match data")
    rng = make_rng(cfg.seed)

    F0, _ = _features(backbone, X, update_running=False)
    idx = _init_prototypes(F0, cfg.k, rng, cfg.init)
    if cfg.prototype_mode == "direct":
        P0 = F0[idx].T.copy() if init_P is None else np.array(init_P, float)
        state = DclState("direct", P=P0.copy())
    else:
        w2 = np.zeros((n, cfg.k))
        w2[idx, np.arange(cfg.k)] = 1.0
        state = DclState("dual", w2=w2)
        P0 = dcl_forward(F0, w2)
    head = None
    if cfg.loss_kind == "softce":
        dF = F0.shape[1]
        head = [rng.standard_normal((dF, cfg.k)) / np.sqrt(dF), np.zeros(cfg.k)]

    trace = TrainTrace(s_initial=separation(P0) if cfg.k > 1 else 0.0)
    base = "lols" if cfg.loss_kind == "lols" else "lq"
    phases = sorted(cfg.phases, key=lambda p: p["epoch"])
    Q = None
    hard = None

    for epoch in range(cfg.epochs):
        for ph in phases:
            if ph["epoch"] == epoch:
                cfg = replace(cfg, **{k: v for k, v in ph.items() if k != "epoch"})
        T = anneal(cfg.T0, cfg.T_min, cfg.tau, epoch)
        weights = cfg.weights(cfg.eta_at(epoch))

        if cfg.batch_size and cfg.batch_size < n:
            order = rng.permutation(n)
            batches = [order[s:s + cfg.batch_size] for s in range(0, n, cfg.batch_size)]
            batches = [b for b in batches if len(b) > 1 or backbone is None]
        else:
            batches = [np.arange(n)]

        for b in batches:
            Xb = X[b]
            F, cache = _features(backbone, Xb)
            P = state.prototypes(F)
            og = objective_grads(F, P, T, weights, base, cfg.stop_gradient)
            _check_finite(og.breakdown, [("grad_P", og.grad_P), ("grad_Z", og.grad_Z)], epoch)
            gF = og.grad_Z
            if head is not None:
                logits = F @ head[0] + head[1]
                G = (np.exp(log_softmax(logits)) - og.Q) / F.shape[0]
                gF = gF + G @ head[0].T
                head[0] -= cfg.lr_dcl * (F.T @ G)
                head[1] -= cfg.lr_dcl * G.sum(axis=0)
            if state.mode == "direct":
                state.P = state.P - cfg.lr_dcl * og.grad_P
            else:
                g_w2, g_F = dcl_backward(F, state.w2, og.grad_P)
                state.w2 = state.w2 - cfg.lr_dcl * g_w2
                gF = gF + g_F
            if backbone is not None:
                grads, _ = mlp_backward(backbone, cache, gF)
                for key, g in grads.items():
                    if not np.all(np.isfinite(g)):
                        raise NumericalAbort(f"backbone {key}", epoch)
                sgd_step(backbone, grads, cfg.lr_backbone)

        Fd, _ = _features(backbone, X, update_running=False)
        Pd = state.prototypes(Fd)
        row, Q, hard, viol = _diagnostics(Fd, Pd, T, labels, epoch)
        if not all(np.isfinite(row[c]) for c in ("l_q", "l_ols", "v", "s")):
            raise NumericalAbort("diagnostics", epoch)
        trace.v_violations += viol
        trace.rows.append(row)
        if backbone is not None and cfg.margin_every and epoch % cfg.margin_every == 0:
            jn = jacobian_norm_estimate(backbone, X[:min(n, 64)], iters=8, seed=cfg.seed)
            trace.margins.append((epoch,) + stability_margin(Pd, T, jn, cfg.lr_backbone, cfg.lr_dcl))

    Ff, _ = _features(backbone, X, update_running=False)
    return TrainResult(state.prototypes(Ff), Q, hard, trace, state, backbone, P0)
