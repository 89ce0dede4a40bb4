"""SVD + k-means initialization of the row and column labels."""
from dataclasses import dataclass

import numpy as np

from .linalg import as_matrix, truncated_svd
from .model import Assignment


@dataclass(frozen=True)
class KMeansConfig:
    restarts: int = 10
    max_iter: int = 100
    tol: float = 1e-6
    seed: int = 0

    def __post_init__(self):
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")


def _sq_dists(X, centers):
    d = (X * X).sum(1)[:, None] - 2 * X @ centers.T + (centers * centers).sum(1)[None, :]
    return np.maximum(d, 0.0)


def _plusplus(X, k, rng):
    n = X.shape[0]
    centers = np.empty((k, X.shape[1]))
    centers[0] = X[rng.integers(n)]
    closest = _sq_dists(X, centers[:1])[:, 0]
    for j in range(1, k):
        total = closest.sum()
        if total > 0:
            idx = rng.choice(n, p=closest / total)
        else:
            idx = rng.integers(n)
        centers[j] = X[idx]
        closest = np.minimum(closest, _sq_dists(X, centers[j:j + 1])[:, 0])
    return centers


def _repair_empty(X, labels, centers, k):
    # move the farthest point of the largest cluster into each empty cluster
    labels = labels.copy()
    for j in range(k):
        if np.any(labels == j):
            continue
        sizes = np.bincount(labels, minlength=k)
        big = int(np.argmax(sizes))
        members = np.flatnonzero(labels == big)
        d = ((X[members] - X[members].mean(0)) ** 2).sum(1)
        far = members[int(np.argmax(d))]
        labels[far] = j
        centers[j] = X[far]
    return labels


def _lloyd(X, k, cfg, rng):
    centers = _plusplus(X, k, rng)
    labels = np.argmin(_sq_dists(X, centers), axis=1)
    for _ in range(cfg.max_iter):
        labels = _repair_empty(X, labels, centers, k)
        new = np.stack([X[labels == j].mean(0) for j in range(k)])
        shift = np.sqrt(((new - centers) ** 2).sum())
        centers = new
        labels = np.argmin(_sq_dists(X, centers), axis=1)
        if shift <= cfg.tol:
            break
    labels = _repair_empty(X, labels, centers, k)
    centers = np.stack([X[labels == j].mean(0) for j in range(k)])
    wcss = float(((X - centers[labels]) ** 2).sum())
    return labels, wcss


def kmeans(points, k, cfg=KMeansConfig()):
    """Best-of-restarts Lloyd k-means with k-means++ seeding.

    Returns 0-based labels; every cluster is nonempty. Restart ``r`` draws
    from the stream ``[cfg.seed, r]``; the lowest within-cluster sum of
    squares wins, ties going to the earlier restart.
    """
    X = np.asarray(points, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if k < 1:
        raise ValueError("k must be >= 1")
    if X.shape[0] < k:
        raise ValueError(f"need at least k={k} points, got {X.shape[0]}")
    if k == 1:
        return np.zeros(X.shape[0], dtype=np.int64)
    best, best_wcss = None, np.inf
    for r in range(cfg.restarts):
        labels, wcss = _lloyd(X, k, cfg, np.random.default_rng([cfg.seed, r]))
        if wcss < best_wcss:
            best, best_wcss = labels, wcss
    return best.astype(np.int64)


def svd_kmeans_init(A, K, L, cfg=KMeansConfig()):
    """Cluster the leading singular vectors of ``A``.

    A rank ``max(K, L)`` truncated SVD gives ``U`` and ``V``; k-means on the
    rows of ``U[:, :K]`` gives the out-labels and on ``V[:, :L]`` the
    in-labels. Singular vectors are not scaled by the singular values.
    """
    A = as_matrix(A)
    n, m = A.shape
    if K > n or L > m:
        raise ValueError(f"need K <= n and L <= m, got K={K}, L={L}, shape {A.shape}")
    r = max(K, L)
    if r > min(n, m):
        raise ValueError(f"rank {r} exceeds min(n, m) = {min(n, m)}")
    U, _, V = truncated_svd(A, r, seed=cfg.seed)
    c = kmeans(U[:, :K], K, cfg)
    z = kmeans(V[:, :L], L, cfg)
    return Assignment(c, z, K, L)
