"""Comparison methods: SVD + k-means and similarity-based spectral clustering.

The similarity methods are one-sided; row labels come from ``A`` and column
labels from ``A.T``.
"""
import numpy as np

from .initialization import KMeansConfig, kmeans, svd_kmeans_init
from .linalg import as_matrix, top_eigh
from .model import Assignment


def svdk(A, K, L, cfg=KMeansConfig()):
    return svd_kmeans_init(A, K, L, cfg)


def similarity_matrix(A, kind="cosine"):
    A = as_matrix(A)
    if kind == "inner":
        return A @ A.T
    if kind != "cosine":
        raise ValueError(f"kind must be 'cosine' or 'inner', got {kind!r}")
    norms = np.linalg.norm(A, axis=1)
    R = np.zeros_like(A)
    np.divide(A, norms[:, None], out=R, where=norms[:, None] > 0)
    return R @ R.T


def spectral_similarity(A, K, kind="cosine", cfg=KMeansConfig()):
    """Cluster the rows of ``A`` from the top-K eigenvectors of a row similarity.

    Eigenvector rows are scaled to unit length before k-means; all-zero rows
    of the embedding are left at the origin.
    """
    A = as_matrix(A)
    if K > A.shape[0]:
        raise ValueError(f"K={K} exceeds the number of rows {A.shape[0]}")
    S = similarity_matrix(A, kind)
    _, X = top_eigh(S, K, seed=cfg.seed)
    norms = np.linalg.norm(X, axis=1)
    Y = np.zeros_like(X)
    np.divide(X, norms[:, None], out=Y, where=norms[:, None] > 1e-12)
    return kmeans(Y, K, cfg)


def cossc(A, K, L, cfg=KMeansConfig()):
    A = as_matrix(A)
    return Assignment(
        spectral_similarity(A, K, "cosine", cfg), spectral_similarity(A.T, L, "cosine", cfg), K, L
    )


def insc(A, K, L, cfg=KMeansConfig()):
    A = as_matrix(A)
    return Assignment(
        spectral_similarity(A, K, "inner", cfg), spectral_similarity(A.T, L, "inner", cfg), K, L
    )


METHODS = {"svdk": svdk, "cossc": cossc, "insc": insc}
