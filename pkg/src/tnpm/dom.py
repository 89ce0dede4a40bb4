"""Delete-One-Method: greedy per-node label updates on the block rank-one loss.

The loss of a co-clustering is the sum over blocks of ``||B||_F^2 - sigma_1(B)^2``.
Moving row ``i`` changes only the blocks of its source and destination
clusters, and for a candidate cluster ``k`` the marginal cost of holding row
``i`` is

    delta_k = sum_l ( resid(B_kl + row i) - resid(B_kl - row i) )
            = ||A_i||^2 - sum_l ( sigma_1^2(B_kl + row i) - sigma_1^2(B_kl - row i) ).

During a half-sweep over rows we keep the eigendecomposition of every column
Gram matrix ``B_kl^T B_kl``. Adding or removing a row is a symmetric rank-one
update of that Gram matrix, so the new top eigenvalue is the root of a
secular equation and each candidate costs one projection onto the cached
eigenbasis. Eigendecompositions are refreshed only when a row actually
moves. Columns are handled by running the same half-sweep on ``A.T``.
"""
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .linalg import as_matrix, frobenius_sq, rank_one_residual
from .model import Assignment, EmptyClusterError, groups, partition_from, block_view


@dataclass(frozen=True)
class FitConfig:
    epsilon: float = 1e-6
    max_iter: int = 100
    seed: int = 0

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")


@dataclass
class FitResult:
    """Outcome of a fit.

    ``loss_trajectory[0]`` is the objective at the initial assignment and
    ``loss_trajectory[t]`` the objective after sweep ``t``.
    """

    assignment: Assignment
    loss_trajectory: list
    sweeps: int
    converged: bool
    moves: list = field(default_factory=list)

    @property
    def loss(self):
        return self.loss_trajectory[-1]


@njit(cache=True)
def _secular_eval(t, w2, delta, sign):
    # secular function in the shifted variable t (update) or s (downdate) and its derivative
    f = 1.0
    fp = 0.0
    for i in range(w2.shape[0]):
        if w2[i] == 0.0:
            continue
        if sign > 0:
            den = t + delta[i]
        else:
            den = t - delta[i]
        f -= w2[i] / den
        fp += w2[i] / (den * den)
    return f, fp


@njit(cache=True)
def _solve(lo, hi, t, w2, delta, sign):
    # safeguarded root finder for an increasing f with a pole at t = 0
    for _ in range(200):
        if t <= 0.0:
            return 0.0
        f, fp = _secular_eval(t, w2, delta, sign)
        if f == 0.0:
            return t
        if f > 0.0:
            hi = t
        else:
            lo = t
        beta = t * t * fp
        alpha = f + beta / t
        tn = beta / alpha if alpha > 0.0 else -1.0
        if not (lo < tn < hi):
            tn = 0.5 * (lo + hi)
        if abs(tn - t) <= 4e-16 * tn or hi - lo <= 4e-16 * hi:
            return tn
        t = tn
    return t


@njit(cache=True)
def top_eig_rank_one(lam, w, sign):
    """Largest eigenvalue of ``diag(lam) + sign * w w^T`` for PSD results.

    ``sign`` is +1 for an update and -1 for a downdate; a downdate must leave
    the matrix positive semidefinite (it removes a row from its own block).
    """
    d = lam.shape[0]
    lmax = lam[0]
    for i in range(d):
        if lam[i] > lmax:
            lmax = lam[i]
    w2 = np.empty(d)
    delta = np.empty(d)
    total = 0.0
    for i in range(d):
        w2[i] = w[i] * w[i]
        delta[i] = lmax - lam[i]
        total += w2[i]
    if total == 0.0:
        return lmax
    thr = 1e-13 * max(abs(lmax), total)
    top_w = 0.0
    mult = 0
    second = 0.0
    for i in range(d):
        if delta[i] <= thr:
            top_w += w2[i]
            mult += 1
        elif lam[i] > second:
            second = lam[i]
    if top_w <= 1e-30 * total:
        # a negligible pole weight only underflows the solver
        for i in range(d):
            if delta[i] <= thr:
                w2[i] = 0.0
        top_w = 0.0
    if sign > 0:
        hi = total
        if top_w == 0.0:
            f0 = 1.0
            for i in range(d):
                if w2[i] > 0.0 and delta[i] > thr:
                    f0 -= w2[i] / delta[i]
            if f0 >= 0.0:
                return lmax
        return lmax + _solve(0.0, hi, hi, w2, delta, 1)
    # downdate: the top eigenvalue survives if it is repeated or untouched
    if mult >= 2 or top_w == 0.0:
        return lmax
    hi = top_w
    for i in range(d):
        if w2[i] > 0.0 and delta[i] > thr and delta[i] < hi:
            hi = delta[i]
    s = _solve(0.0, hi, hi if hi == top_w else 0.5 * hi, w2, delta, -1)
    x = lmax - s
    if x < second:
        x = second
    return max(x, 0.0)


@njit(cache=True)
def _gains(lam, W, k0):
    # gain[k] = sum_l sigma^2(block kl holding the row) - sigma^2(block kl without it)
    K, L, d = W.shape
    out = np.zeros(K)
    for k in range(K):
        g = 0.0
        for l in range(L):
            top = lam[k, l, d - 1]
            if k == k0:
                g += top - top_eig_rank_one(lam[k, l], W[k, l], -1)
            else:
                g += top_eig_rank_one(lam[k, l], W[k, l], 1) - top
        out[k] = g
    return out


class _RowState:
    """Gram eigendecompositions for every block, for updating row labels."""

    def __init__(self, A, rows, cols, K, L):
        n, _ = A.shape
        self.K, self.L = K, L
        self.rows = rows
        col_idx = groups(cols, L)
        d = max(len(g) for g in col_idx)
        pad = np.zeros((n, L, d))
        for l, g in enumerate(col_idx):
            pad[:, l, : len(g)] = A[:, g]
        self.pad = pad
        self.seg_sq = (pad * pad).sum(axis=2)
        self.row_sq = self.seg_sq.sum(axis=1)
        self.sizes = np.bincount(rows, minlength=K)
        G = np.zeros((K, L, d, d))
        for k in range(K):
            X = pad[rows == k]
            if X.shape[0]:
                G[k] = np.matmul(X.transpose(1, 2, 0), X.transpose(1, 0, 2))
        self.G = G
        self.lam, self.Q = np.linalg.eigh(G)

    def deltas(self, i):
        W = np.matmul(self.pad[i][None, :, None, :], self.Q)[:, :, 0, :]
        return self.row_sq[i] - _gains(self.lam, W, self.rows[i])

    def move(self, i, k):
        k0 = self.rows[i]
        x = self.pad[i]
        outer = x[:, :, None] * x[:, None, :]
        self.G[k0] -= outer
        self.G[k] += outer
        lam, Q = np.linalg.eigh(self.G[[k0, k]])
        self.lam[[k0, k]] = lam
        self.Q[[k0, k]] = Q
        self.sizes[k0] -= 1
        self.sizes[k] += 1
        self.rows[i] = k

    def loss(self):
        frob = np.zeros((self.K, self.L))
        np.add.at(frob, self.rows, self.seg_sq)
        return float(max((frob - self.lam[:, :, -1]).sum(), 0.0))


def _half_sweep(A, rows, cols, K, L):
    """Sequentially re-label every row of ``A``; returns ``(moves, loss)``."""
    st = _RowState(A, rows, cols, K, L)
    moves = 0
    for i in range(A.shape[0]):
        k0 = rows[i]
        if st.sizes[k0] == 1 or st.row_sq[i] == 0.0:
            continue
        delta = st.deltas(i)
        best = int(np.argmin(delta))
        if best != k0 and delta[best] < delta[k0] - 1e-10 * st.row_sq[i]:
            st.move(i, best)
            moves += 1
    return moves, st.loss()


def _check_shape(A, a):
    if A.shape != (a.n, a.m):
        raise ValueError(f"matrix shape {A.shape} does not match assignment ({a.n}, {a.m})")


def total_loss(A, a, tol=1e-12):
    """Sum over all blocks of the rank-one residual ``||B||^2 - sigma_1(B)^2``."""
    A = as_matrix(A)
    _check_shape(A, a)
    p = partition_from(a)
    return sum(
        rank_one_residual(block_view(A, p, k, l), tol=tol)
        for k in range(a.k_count)
        for l in range(a.l_count)
    )


def _delta_vector(A, rows, cols, K, L, i):
    st = _RowState(A, np.array(rows, copy=True), cols, K, L)
    return st.deltas(i)


def row_deltas(A, a, i):
    """Marginal cost of placing row ``i`` in each out-cluster (length K)."""
    A = as_matrix(A)
    _check_shape(A, a)
    return _delta_vector(A, a.c, a.z, a.k_count, a.l_count, i)


def col_deltas(A, a, j):
    """Marginal cost of placing column ``j`` in each in-cluster (length L)."""
    A = as_matrix(A)
    _check_shape(A, a)
    return _delta_vector(np.ascontiguousarray(A.T), a.z, a.c, a.l_count, a.k_count, j)


def _guard(labels, count, idx, target, what):
    if not 0 <= target < count:
        raise ValueError(f"candidate label {target} outside [0, {count - 1}]")
    if labels[idx] != target and np.sum(labels == labels[idx]) == 1:
        raise EmptyClusterError(
            f"moving {what} {idx} to cluster {target} would empty cluster {labels[idx]}"
        )


def row_delta(A, a, i, k):
    _guard(a.c, a.k_count, i, k, "row")
    return float(row_deltas(A, a, i)[k])


def col_delta(A, a, j, l):
    _guard(a.z, a.l_count, j, l, "column")
    return float(col_deltas(A, a, j)[l])


def fit_dom(A, K, L, init, cfg=FitConfig()):
    """Alternating delete-one sweeps over rows then columns.

    Each node is moved to the label with the smallest marginal cost, using
    labels already updated earlier in the sweep; the current label wins
    ties and sole members of a cluster stay put. Stops when the relative
    change of the loss over a sweep falls below ``cfg.epsilon`` or after
    ``cfg.max_iter`` sweeps.
    """
    A = as_matrix(A)
    if (init.k_count, init.l_count) != (K, L):
        raise ValueError(f"init has (K, L)=({init.k_count}, {init.l_count}), expected ({K}, {L})")
    _check_shape(A, init)
    At = np.ascontiguousarray(A.T)
    c = init.c.copy()
    z = init.z.copy()
    zero = 1e-12 * max(frobenius_sq(A), np.finfo(float).tiny)
    traj = [_RowState(A, c.copy(), z, K, L).loss()]
    moves = []
    converged = False
    sweeps = 0
    while sweeps < cfg.max_iter:
        mr, _ = _half_sweep(A, c, z, K, L)
        mc, loss = _half_sweep(At, z, c, L, K)
        sweeps += 1
        moves.append(mr + mc)
        prev = traj[-1]
        # unchanged labels mean an unchanged loss; skip the recomputed rounding
        traj.append(loss if mr + mc else prev)
        if prev <= zero or loss <= zero or mr + mc == 0:
            converged = True
            break
        if abs(loss - prev) / prev < cfg.epsilon:
            converged = True
            break
    return FitResult(Assignment(c, z, K, L), traj, sweeps, converged, moves)
