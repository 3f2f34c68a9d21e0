"""Comparison methods: Lloyd k-means, mini-batch k-means, PCA preprocessing
and an alternating pseudo-label baseline (DeepCluster-lite)."""

from dataclasses import dataclass, field

import numpy as np

from .backbone import mlp_backward, mlp_forward, sgd_step
from .metrics import evaluate
from .numerics import as_matrix, make_rng, pairwise_sq_dists


@dataclass
class KmeansResult:
    centroids: np.ndarray  # (d, k)
    labels: np.ndarray
    inertia: float
    iterations: int
    n_init: int
    history: list = field(default_factory=list)


def _plusplus(Z, k, rng):
    n = Z.shape[0]
    C = np.empty((Z.shape[1], k))
    C[:, 0] = Z[rng.integers(n)]
    dmin = pairwise_sq_dists(Z, C[:, :1])[:, 0]
    for j in range(1, k):
        total = dmin.sum()
        if total <= 0:
            idx = rng.integers(n)
        else:
            idx = int(rng.choice(n, p=dmin / total))
        C[:, j] = Z[idx]
        dmin = np.minimum(dmin, pairwise_sq_dists(Z, C[:, j:j + 1])[:, 0])
    return C


def _fix_empty(Z, C, labels, D):
    """Move each empty centroid onto the point farthest from its own centroid."""
    k = C.shape[1]
    counts = np.bincount(labels, minlength=k)
    for j in np.flatnonzero(counts == 0):
        own = D[np.arange(Z.shape[0]), labels]
        far = int(np.argmax(own))
        C[:, j] = Z[far]
        labels[far] = j
        D = pairwise_sq_dists(Z, C)
    return C, labels


def lloyd(Z, C, max_iter=300, tol=0.0):
    """Lloyd iterations from centroids ``C``; returns (C, labels, inertia, iters, history)."""
    history = []
    labels = None
    it = 0
    for it in range(1, max_iter + 1):
        D = pairwise_sq_dists(Z, C)
        new = np.argmin(D, axis=1)
        inertia = float(D[np.arange(len(new)), new].sum())
        history.append(inertia)
        if labels is not None and np.array_equal(new, labels):
            break
        labels = new
        C, labels = _fix_empty(Z, C.copy(), labels.copy(), D)
        for j in range(C.shape[1]):
            C[:, j] = Z[labels == j].mean(axis=0)
    D = pairwise_sq_dists(Z, C)
    labels = np.argmin(D, axis=1)
    inertia = float(D[np.arange(len(labels)), labels].sum())
    return C, labels, inertia, it, history


def kmeans(Z, k, n_init=20, max_iter=300, seed=0):
    Z = as_matrix(Z, "Z")
    n = Z.shape[0]
    if n < k:
        raise ValueError(f"k-means needs n >= k, got n={n}, k={k}")
    if k < 1 or n_init < 1:
        raise ValueError("k and n_init must be >= 1")
    rng = make_rng(seed)
    best = None
    for _ in range(n_init):
        C, labels, inertia, it, hist = lloyd(Z, _plusplus(Z, k, rng), max_iter)
        if best is None or inertia < best.inertia:
            best = KmeansResult(C, labels, inertia, it, n_init, hist)
    return best


def minibatch_kmeans(stream, k, B=50, seed=0):
    """Single pass over ``stream`` (array or iterable of batches) with
    per-centroid ``1/count`` learning rates."""
    if B < 1:
        raise ValueError("batch size must be >= 1")
    rng = make_rng(seed)
    if isinstance(stream, np.ndarray):
        Z = as_matrix(stream, "stream")
        batches = [Z[i:i + B] for i in range(0, Z.shape[0], B)]
    else:
        batches = [as_matrix(b, "batch") for b in stream]
    C = None
    counts = np.zeros(k)
    for X in batches:
        if C is None:
            pool = X
            while pool.shape[0] < k:
                pool = np.vstack([pool, X])
            C = _plusplus(pool, k, rng)
        lab = np.argmin(pairwise_sq_dists(X, C), axis=1)
        for x, j in zip(X, lab):
            counts[j] += 1
            C[:, j] += (x - C[:, j]) / counts[j]
    allZ = np.vstack(batches)
    D = pairwise_sq_dists(allZ, C)
    labels = np.argmin(D, axis=1)
    return KmeansResult(C, labels, float(D[np.arange(len(labels)), labels].sum()), len(batches), 1)


@dataclass
class PcaTransform:
    mean: np.ndarray
    components: np.ndarray  # (d, m) orthonormal columns
    explained_variance: np.ndarray
    explained_variance_ratio: np.ndarray
    whiten: bool
    scale: np.ndarray = None

    def apply(self, Z):
        Y = (np.asarray(Z, float) - self.mean) @ self.components
        if self.whiten:
            Y = Y / np.sqrt(np.maximum(self.explained_variance, 1e-12))
        if self.scale is not None:
            Y = Y / self.scale
        return Y


def pca_standardize(Z, n_components, whiten=False, standardize=False):
    Z = as_matrix(Z, "Z")
    n, d = Z.shape
    if not 1 <= n_components <= min(n, d):
        raise ValueError(f"n_components={n_components} must lie in [1, min(n, d)={min(n, d)}]")
    mean = Z.mean(axis=0)
    Xc = Z - mean
    # thin SVD of the centered data gives the covariance eigenvectors without forming d x d
    _, sv, Vt = np.linalg.svd(Xc, full_matrices=False)
    var = sv ** 2 / max(n - 1, 1)
    V = Vt[:n_components].T
    w = var[:n_components]
    flip = np.sign(V[np.argmax(np.abs(V), axis=0), np.arange(V.shape[1])])
    V = V * np.where(flip == 0, 1.0, flip)
    total = float(np.sum(Xc * Xc)) / max(n - 1, 1)
    ratio = w / total if total > 0 else np.zeros_like(w)
    tr = PcaTransform(mean, V, w, ratio, whiten)
    Y = tr.apply(Z)
    if standardize:
        sd = Y.std(axis=0)
        sd[sd == 0] = 1.0
        tr.scale = sd
        Y = Y / sd
    return Y, tr


@dataclass
class DeepClusterConfig:
    rounds: int = 10
    n_components: int = 256
    n_init: int = 20
    head_epochs: int = 20
    head_lr: float = 0.1
    train_backbone: bool = False
    backbone_lr: float = 0.01
    batch_size: int = 128
    seed: int = 0


def _preprocess(F, n_components):
    m = min(n_components, F.shape[0] - 1, F.shape[1])
    Y, _ = pca_standardize(F, m, whiten=True)
    norms = np.linalg.norm(Y, axis=1, keepdims=True)
    return Y / np.where(norms > 0, norms, 1.0)


def deepcluster_lite(X, k, config=DeepClusterConfig(), backbone=None, y_true=None):
    """Alternate k-means pseudo-labels and cross-entropy training.

    With ``backbone=None`` the features are frozen and only the linear head is
    fit. Returns ``(labels, trace)`` where labels are the last round's k-means
    assignment and ``trace`` holds per-round diagnostics.
    """
    X = as_matrix(X, "X")
    if config.rounds < 1:
        raise ValueError("rounds must be >= 1")
    rng = make_rng(config.seed)
    trace = []
    labels = None
    for r in range(config.rounds):
        F = X if backbone is None else mlp_forward(backbone, X, mode="eval")[0]
        Y = _preprocess(F, config.n_components)
        km = kmeans(Y, k, n_init=config.n_init, seed=int(rng.integers(2**31)))
        labels = km.labels
        counts = np.bincount(labels, minlength=k).astype(float)
        w = 1.0 / np.maximum(counts[labels], 1.0)
        w = w * len(w) / w.sum()
        # fresh head each round since cluster indices are permuted between rounds
        Wh = rng.standard_normal((F.shape[1], k)) * np.sqrt(1.0 / F.shape[1])
        bh = np.zeros(k)
        ce = 0.0
        for _ in range(config.head_epochs):
            order = rng.permutation(X.shape[0])
            for s in range(0, len(order), config.batch_size):
                idx = order[s:s + config.batch_size]
                if backbone is not None and config.train_backbone and len(idx) > 1:
                    Fb, cache = mlp_forward(backbone, X[idx], mode="train")
                else:
                    Fb, cache = F[idx], None
                logits = Fb @ Wh + bh
                logits -= logits.max(axis=1, keepdims=True)
                Pr = np.exp(logits)
                Pr /= Pr.sum(axis=1, keepdims=True)
                onehot = np.eye(k)[labels[idx]]
                wb = w[idx][:, None] / len(idx)
                ce = float(-np.sum(wb * onehot * np.log(np.maximum(Pr, 1e-30))))
                G = wb * (Pr - onehot)
                gF = G @ Wh.T
                Wh -= config.head_lr * (Fb.T @ G)
                bh -= config.head_lr * G.sum(axis=0)
                if cache is not None:
                    grads, _ = mlp_backward(backbone, cache, gF)
                    sgd_step(backbone, grads, config.backbone_lr)
        row = {"round": r, "inertia": km.inertia, "ce": ce,
               "sizes": np.bincount(labels, minlength=k).tolist()}
        if y_true is not None:
            row.update(evaluate(y_true, labels))
        trace.append(row)
    return labels, trace

