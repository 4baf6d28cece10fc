"""Anchor selection and per-view anchor graphs."""

import numpy as np
from sklearn.cluster import KMeans


def standardize(X):
    """Zero-mean, unit-variance columns; constant columns are only centered."""
    X = np.asarray(X, dtype=np.float64)
    Xc = X - X.mean(axis=0)
    std = Xc.std(axis=0)
    std[std == 0] = 1.0
    return Xc / std


def anchor_count(n, anchor_rate, K):
    return int(min(n, max(K, round(anchor_rate * n))))


def select_anchors(X, m, seed=0, method="kmeans"):
    """Pick ``m`` anchors in the feature space of one view.

    ``"kmeans"`` returns Lloyd centroids from a seeded k-means++ start (at most
    100 iterations); ``"uniform_random"`` returns ``m`` distinct sample rows.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] == 0:
        raise ValueError("select_anchors needs a non-empty n x d matrix")
    n = X.shape[0]
    if not 1 <= m <= n:
        raise ValueError(f"anchor count m={m} must lie in [1, n={n}]")
    if method == "uniform_random":
        idx = np.random.default_rng(seed).choice(n, size=m, replace=False)
        return X[idx].copy()
    if method == "kmeans":
        km = KMeans(
            n_clusters=m,
            init="k-means++",
            n_init=1,
            max_iter=100,
            tol=1e-6,
            algorithm="lloyd",
            random_state=seed,
        )
        return km.fit(X).cluster_centers_
    raise ValueError(f"unknown anchor method {method!r}")


def squared_distances(X, A):
    d = (X**2).sum(1)[:, None] - 2.0 * X @ A.T + (A**2).sum(1)[None, :]
    return np.maximum(d, 0.0)


def build_anchor_graph(X, anchors, k=5):
    """Adaptive-neighbour anchor graph: each row is a simplex weight on its k nearest anchors.

    Weights are ``(d_{k+1} - d_j) / (k d_{k+1} - sum_{h<=k} d_h)`` on the k
    nearest anchors (squared Euclidean distances, ties to the lower anchor
    index). A row whose k nearest distances all equal ``d_{k+1}`` falls back
    to uniform ``1/k`` weights.
    """
    X = np.asarray(X, dtype=np.float64)
    anchors = np.asarray(anchors, dtype=np.float64)
    n, m = X.shape[0], anchors.shape[0]
    if not 1 <= k < m:
        raise ValueError(f"neighbour count k={k} must satisfy 1 <= k < m={m}")
    D = squared_distances(X, anchors)
    order = np.argsort(D, axis=1, kind="stable")[:, : k + 1]
    d = np.take_along_axis(D, order, axis=1)
    kth = d[:, k : k + 1]
    num = kth - d[:, :k]
    den = num.sum(axis=1, keepdims=True)
    degenerate = den[:, 0] <= 0
    den[degenerate] = 1.0
    W = num / den
    W[degenerate] = 1.0 / k
    S = np.zeros((n, m))
    np.put_along_axis(S, order[:, :k], W, axis=1)
    return S


def assemble_graph_tensor(graphs):
    """Stack per-view ``n x m`` anchor graphs into an ``n x m x V`` tensor."""
    graphs = [np.asarray(S, dtype=np.float64) for S in graphs]
    if not graphs:
        raise ValueError("need at least one anchor graph")
    shape = graphs[0].shape
    for v, S in enumerate(graphs):
        if S.ndim != 2 or S.shape != shape:
            raise ValueError(f"view {v}: graph shape {S.shape} differs from {shape}")
    return np.stack(graphs, axis=2)


def select_shared_anchors(views, m, seed=0, method="kmeans"):
    """Anchors that denote the same sample group in every view.

    ``"kmeans"`` clusters the concatenated views and returns, per view, the
    mean of each cluster's members in that view's features.
    ``"uniform_random"`` picks the same ``m`` sample rows in every view.
    """
    views = [np.asarray(X, dtype=np.float64) for X in views]
    n = views[0].shape[0]
    if any(X.shape[0] != n for X in views):
        raise ValueError("all views must have the same number of samples")
    if method == "uniform_random":
        if not 1 <= m <= n:
            raise ValueError(f"anchor count m={m} must lie in [1, n={n}]")
        idx = np.random.default_rng(seed).choice(n, size=m, replace=False)
        return [X[idx].copy() for X in views]
    if method != "kmeans":
        raise ValueError(f"unknown anchor method {method!r}")
    joint = np.hstack(views)
    centers = select_anchors(joint, m, seed=seed, method="kmeans")
    assign = np.argmin(squared_distances(joint, centers), axis=1)
    anchors = []
    for X in views:
        A = np.empty((m, X.shape[1]))
        for j in range(m):
            members = assign == j
            if members.any():
                A[j] = X[members].mean(axis=0)
            else:
                A[j] = X[np.argmin(squared_distances(joint, centers[j : j + 1])[:, 0])]
        anchors.append(A)
    return anchors


def anchor_graph_tensor(views, anchor_rate, K, k=5, seed=0, method="kmeans"):
    """Standardize each view, select shared anchors and build the graph tensor.

    Returns the ``n x m x V`` tensor and the list of per-view anchor matrices.
    """
    n = views[0].shape[0]
    m = anchor_count(n, anchor_rate, K)
    if m < 2:
        raise ValueError("need at least two anchors")
    k = min(k, m - 1)
    Xs = [standardize(X) for X in views]
    anchor_sets = select_shared_anchors(Xs, m, seed=seed, method=method)
    graphs = [build_anchor_graph(X, A, k) for X, A in zip(Xs, anchor_sets)]
    return assemble_graph_tensor(graphs), anchor_sets
