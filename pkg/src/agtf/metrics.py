"""Clustering accuracy, normalized mutual information and purity."""

import numpy as np
from scipy.optimize import linear_sum_assignment


def _labels(y):
    y = np.asarray(y)
    if y.ndim != 1 or y.size == 0:
        raise ValueError("labels must be a non-empty 1-D array")
    if not np.issubdtype(y.dtype, np.integer):
        if not np.all(np.equal(np.mod(y, 1), 0)):
            raise ValueError("labels must be integers")
        y = y.astype(np.int64)
    if y.min() < 0:
        raise ValueError("labels must be nonnegative")
    return y


def contingency(truth, pred):
    """Counts ``C[t, p]`` of samples with true class ``t`` and predicted cluster ``p``."""
    truth, pred = _labels(truth), _labels(pred)
    if truth.shape != pred.shape:
        raise ValueError(f"length mismatch: {truth.size} vs {pred.size}")
    _, t = np.unique(truth, return_inverse=True)
    _, p = np.unique(pred, return_inverse=True)
    C = np.zeros((t.max() + 1, p.max() + 1), dtype=np.int64)
    np.add.at(C, (t, p), 1)
    return C


def hungarian_max(profit):
    """Permutation ``perm`` maximizing ``sum_i profit[i, perm[i]]``."""
    profit = np.asarray(profit)
    if profit.ndim != 2 or profit.shape[0] != profit.shape[1]:
        raise ValueError(f"profit matrix must be square, got shape {profit.shape}")
    rows, cols = linear_sum_assignment(profit, maximize=True)
    perm = np.empty(profit.shape[0], dtype=np.int64)
    perm[rows] = cols
    return perm


def acc(truth, pred):
    """Fraction of samples correctly labelled under the best one-to-one cluster matching."""
    C = contingency(truth, pred)
    k = max(C.shape)
    square = np.zeros((k, k), dtype=np.int64)
    square[: C.shape[0], : C.shape[1]] = C
    perm = hungarian_max(square)
    return float(square[np.arange(k), perm].sum() / C.sum())


def _entropy(counts, n):
    p = counts[counts > 0] / n
    return float(-(p * np.log(p)).sum())


def nmi(truth, pred):
    """Mutual information over the geometric mean of the two entropies (natural log).

    Two single-cluster partitions score 1; a single-cluster partition against
    a non-trivial one scores 0.
    """
    C = contingency(truth, pred)
    n = C.sum()
    h_t = _entropy(C.sum(axis=1), n)
    h_p = _entropy(C.sum(axis=0), n)
    if h_t == 0 and h_p == 0:
        return 1.0
    if h_t == 0 or h_p == 0:
        return 0.0
    pij = C / n
    outer = np.outer(C.sum(axis=1), C.sum(axis=0)) / n**2
    nz = pij > 0
    mi = float((pij[nz] * np.log(pij[nz] / outer[nz])).sum())
    return float(min(max(mi / np.sqrt(h_t * h_p), 0.0), 1.0))


def purity(truth, pred):
    C = contingency(truth, pred)
    return float(C.max(axis=0).sum() / C.sum())


def evaluate(truth, pred):
    return {"acc": acc(truth, pred), "nmi": nmi(truth, pred), "purity": purity(truth, pred)}
