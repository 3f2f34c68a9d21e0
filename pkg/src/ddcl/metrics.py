"""External clustering indices: Hungarian-matched accuracy, NMI, ARI."""

import numpy as np
from scipy.optimize import linear_sum_assignment


def _labels(y_true, y_pred):
    y_true = np.asarray(y_true).ravel()
    y_pred = np.asarray(y_pred).ravel()
    if y_true.shape != y_pred.shape:
        raise ValueError(f"label vectors differ in length: {y_true.size} vs {y_pred.size}")
    return y_true, y_pred


def contingency(y_true, y_pred):
    """Count matrix with rows = true classes, columns = predicted clusters."""
    y_true, y_pred = _labels(y_true, y_pred)
    ct, ti = np.unique(y_true, return_inverse=True)
    cp, pi = np.unique(y_pred, return_inverse=True)
    C = np.zeros((ct.size, cp.size), dtype=np.int64)
    np.add.at(C, (ti, pi), 1)
    return C


def clustering_accuracy(y_true, y_pred):
    y_true, y_pred = _labels(y_true, y_pred)
    if y_true.size == 0:
        return 0.0
    C = contingency(y_true, y_pred)
    rows, cols = linear_sum_assignment(-C)
    return float(C[rows, cols].sum() / y_true.size)


def _entropy_counts(counts):
    p = counts[counts > 0] / counts.sum()
    return float(-np.sum(p * np.log(p)))


def nmi(y_true, y_pred):
    """Mutual information over the geometric mean of the two label entropies."""
    y_true, y_pred = _labels(y_true, y_pred)
    C = contingency(y_true, y_pred)
    n = C.sum()
    h_t = _entropy_counts(C.sum(axis=1))
    h_p = _entropy_counts(C.sum(axis=0))
    if h_t == 0.0 or h_p == 0.0:
        # both trivial partitions are identical; otherwise there is no shared information
        return 1.0 if h_t == h_p else 0.0
    pij = C / n
    pi = pij.sum(axis=1, keepdims=True)
    pj = pij.sum(axis=0, keepdims=True)
    nz = pij > 0
    mi = float(np.sum(pij[nz] * np.log(pij[nz] / (pi @ pj)[nz])))
    return float(min(max(mi / np.sqrt(h_t * h_p), 0.0), 1.0))


def ari(y_true, y_pred):
    y_true, y_pred = _labels(y_true, y_pred)
    C = contingency(y_true, y_pred).astype(float)
    n = C.sum()
    comb = lambda x: x * (x - 1) / 2.0
    sum_ij = comb(C).sum()
    sum_a = comb(C.sum(axis=1)).sum()
    sum_b = comb(C.sum(axis=0)).sum()
    expected = sum_a * sum_b / comb(n) if n > 1 else 0.0
    max_index = 0.5 * (sum_a + sum_b)
    if max_index == expected:
        return 1.0
    return float((sum_ij - expected) / (max_index - expected))


def evaluate(y_true, y_pred):
    return {"acc": clustering_accuracy(y_true, y_pred), "nmi": nmi(y_true, y_pred), "ari": ari(y_true, y_pred)}
