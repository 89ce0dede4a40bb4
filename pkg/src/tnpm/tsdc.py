"""Two-Stage Divided Cosine algorithm: block cosine similarity against cluster centers."""
from dataclasses import dataclass

import numpy as np

from .dom import FitConfig, FitResult
from .linalg import as_matrix
from .model import Assignment

_TIE = 1e-12


@dataclass(frozen=True)
class CenterSet:
    """Row-cluster centers ``mu`` (K x m) and column-cluster centers ``mu_tilde`` (n x L)."""

    mu: np.ndarray
    mu_tilde: np.ndarray


def _onehot(labels, count):
    H = np.zeros((labels.size, count))
    H[np.arange(labels.size), labels] = 1.0
    return H


def _normalize(X, col_labels, count):
    # unit-norm segments plus the n x count mask of nonzero segments
    H = _onehot(col_labels, count)
    norms = np.sqrt(np.square(X) @ H)
    nonzero = norms > 0
    inv = np.zeros_like(norms)
    np.divide(1.0, norms, out=inv, where=nonzero)
    # spreading through H keeps the result C-ordered, unlike inv[:, col_labels]
    return X * (inv @ H.T), nonzero


def segment_normalize(X, col_labels, count):
    """Scale each segment ``X[i, M_l]`` to unit l2 norm; zero segments stay zero."""
    return _normalize(np.asarray(X, dtype=float), col_labels, count)[0]


def block_cos(x, y, col_groups):
    """Sum over column groups of the cosine between the restricted segments.

    A segment where either vector is identically zero contributes 0.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise ValueError("vectors must have equal length")
    total = 0.0
    for g in col_groups:
        a, b = x[g], y[g]
        na, nb = np.linalg.norm(a), np.linalg.norm(b)
        if na > 0 and nb > 0:
            total += float(a @ b) / (na * nb)
    return total


def _row_centers(A, rows, cols, K, L, normalized=None):
    R, nonzero = normalized if normalized is not None else _normalize(A, cols, L)
    Zh = _onehot(cols, L)
    Ch = _onehot(rows, K).T
    counts = Ch @ nonzero  # K x L
    mu = Ch @ R  # K x m, sums of unit segments
    per = counts[:, cols]
    np.divide(mu, per, out=mu, where=per > 0)
    l1 = np.abs(mu) @ Zh  # K x L
    sizes = np.bincount(cols, minlength=L).astype(float)
    scale = np.zeros_like(l1)
    np.divide(sizes[None, :], l1, out=scale, where=l1 > 0)
    return mu * scale[:, cols]


def update_centers(A, a):
    """Cluster centers from the current labels.

    For block ``(k, l)`` the row center segment is the mean of the
    l2-normalized row segments ``A[i, M_l]``, ``i`` in ``N_k`` (zero segments
    skipped), rescaled to l1 norm ``m_l``; column centers likewise with
    ``n_k``. Blocks with no nonzero segment give a zero center segment.
    """
    A = as_matrix(A)
    mu = _row_centers(A, a.c, a.z, a.k_count, a.l_count)
    mu_t = _row_centers(A.T, a.z, a.c, a.l_count, a.k_count).T
    return CenterSet(mu, mu_t)


def _scores(A, centers, cols, count, R=None):
    # n x K matrix of BlockCos(A_i, center_k) / count
    if R is None:
        R = segment_normalize(A, cols, count)
    C = segment_normalize(centers, cols, count)
    return (R @ C.T) / count


def _pick(S, current=None):
    best = S.max(axis=1, keepdims=True)
    ties = S >= best - _TIE
    labels = np.argmax(ties, axis=1)
    if current is not None:
        keep = ties[np.arange(S.shape[0]), current]
        labels = np.where(keep, current, labels)
    return labels.astype(np.int64)


def assign_rows(A, centers, col_labels, current=None):
    """Label each row by the row center with the largest block cosine similarity.

    ``col_labels`` are the column-cluster labels defining the segments.
    Ties keep ``current`` when given, otherwise the lowest index wins.
    """
    A = as_matrix(A)
    mu = centers.mu if isinstance(centers, CenterSet) else np.asarray(centers, dtype=float)
    col_labels = np.asarray(col_labels)
    L = int(col_labels.max()) + 1
    return _pick(_scores(A, mu, col_labels, L), current)


def assign_cols(A, centers, row_labels, current=None):
    A = as_matrix(A)
    mu_t = centers.mu_tilde if isinstance(centers, CenterSet) else np.asarray(centers, dtype=float)
    row_labels = np.asarray(row_labels)
    K = int(row_labels.max()) + 1
    return _pick(_scores(A.T, mu_t.T, row_labels, K), current)


def _repair(labels, S, count):
    # hand each empty cluster the worst-fitting node from a cluster that can spare it
    labels = labels.copy()
    for k in range(count):
        if np.any(labels == k):
            continue
        sizes = np.bincount(labels, minlength=count)
        fit = S[np.arange(labels.size), labels]
        fit = np.where(sizes[labels] > 1, fit, np.inf)
        labels[int(np.argmin(fit))] = k
    return labels


def objective(A, a, centers=None):
    """``L(c|z) + L~(z|c)``: mean block cosine of every node to its own center."""
    A = as_matrix(A)
    if centers is None:
        centers = update_centers(A, a)
    Sr = _scores(A, centers.mu, a.z, a.l_count)
    Sc = _scores(A.T, centers.mu_tilde.T, a.c, a.k_count)
    return float(Sr[np.arange(a.n), a.c].sum() + Sc[np.arange(a.m), a.z].sum())


def _state(A, At, c, z, K, L):
    # centers from (c, z) and every node's scores against them, normalizing A once per side
    R = _normalize(A, z, L)
    Rt = _normalize(At, c, K)
    mu = _row_centers(A, c, z, K, L, R)
    mu_t = _row_centers(At, z, c, L, K, Rt)
    return _scores(A, mu, z, L, R[0]), _scores(At, mu_t, c, K, Rt[0])


def _own(S, labels):
    return float(S[np.arange(labels.size), labels].sum())


def fit_tsdc(A, K, L, init, cfg=FitConfig()):
    """Alternate center updates with batch row and column re-assignment.

    Both label updates in an iteration use the centers computed from the
    labels at the start of that iteration. Stops when the relative change of
    :func:`objective` is below ``cfg.epsilon``, when no label changes, or
    after ``cfg.max_iter`` iterations. ``loss_trajectory`` records the
    objective (a similarity, so larger is better).
    """
    A = as_matrix(A)
    if (init.k_count, init.l_count) != (K, L):
        raise ValueError(f"init has (K, L)=({init.k_count}, {init.l_count}), expected ({K}, {L})")
    if A.shape != (init.n, init.m):
        raise ValueError("matrix shape does not match init")
    At = np.ascontiguousarray(A.T)
    c, z = init.c.copy(), init.z.copy()
    Sr, Sc = _state(A, At, c, z, K, L)
    traj = [_own(Sr, c) + _own(Sc, z)]
    moves = []
    converged = False
    it = 0
    while it < cfg.max_iter:
        c_new = _repair(_pick(Sr, c), Sr, K)
        z_new = _repair(_pick(Sc, z), Sc, L)
        changed = int((c_new != c).sum() + (z_new != z).sum())
        c, z = c_new, z_new
        Sr, Sc = _state(A, At, c, z, K, L)
        traj.append(_own(Sr, c) + _own(Sc, z))
        moves.append(changed)
        it += 1
        prev = traj[-2]
        if changed == 0 or prev == 0 or abs(traj[-1] - prev) / abs(prev) < cfg.epsilon:
            converged = True
            break
    a = Assignment(c, z, K, L)
    return FitResult(a, traj, it, converged, moves)
