"""Dense-matrix primitives: leading singular triplets, rank-one residuals, norms.

Everything here works on plain 2-D ``numpy`` float arrays. The leading
singular pair is found by block power iteration (subspace iteration with a
Rayleigh-Ritz step) on the smaller Gram matrix, which is robust to small
spectral gaps and to repeated singular values.
"""
from dataclasses import dataclass

import numpy as np

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 1000


class ConvergenceError(RuntimeError):
    """Raised when an iterative solver hits its iteration limit.

    The best iterate found so far is kept on ``best``.
    """

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


@dataclass(frozen=True)
class RankOneFactor:
    sigma: float
    u: np.ndarray
    v: np.ndarray

    def matrix(self):
        return self.sigma * np.outer(self.u, self.v)


def as_matrix(M, name="matrix"):
    """Validate and return ``M`` as a 2-D float64 array with finite entries."""
    M = np.asarray(M, dtype=float)
    if M.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {M.shape}")
    if M.shape[0] < 1 or M.shape[1] < 1:
        raise ValueError(f"{name} must be nonempty, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValueError(f"{name} has non-finite entries")
    return M


def frobenius_sq(M):
    M = np.asarray(M, dtype=float)
    return float(np.vdot(M, M))


def _fix_sign(u, *others):
    # first entry that is nonzero at working precision decides the sign
    scale = np.max(np.abs(u)) if u.size else 0.0
    nz = np.flatnonzero(np.abs(u) > 1e-12 * scale) if scale > 0 else []
    if len(nz) and u[nz[0]] < 0:
        return (-u,) + tuple(-x for x in others)
    return (u,) + others


def _top_eigvec_psd(G, v0, rng, tol, max_iter, block):
    """Top eigenpair of a symmetric PSD matrix by subspace iteration.

    Returns ``(lam, v, resid)``. Raises ConvergenceError carrying the best
    ``(lam, v)`` if the residual test is not met within ``max_iter``.
    """
    d = G.shape[0]
    b = min(d, block)
    X = rng.standard_normal((d, b))
    if v0 is not None:
        X[:, 0] = v0
    X, _ = np.linalg.qr(X)
    scale = max(np.abs(G).max(), np.finfo(float).tiny)
    best = None
    for _ in range(max_iter):
        H = X.T @ G @ X
        theta, Y = np.linalg.eigh((H + H.T) / 2)
        X = X @ Y[:, ::-1]
        lam = theta[-1]
        v = X[:, 0]
        r = np.linalg.norm(G @ v - lam * v)
        if best is None or r < best[2]:
            best = (lam, v.copy(), r)
        if r <= tol * max(lam, tol * scale):
            return lam, v, r
        X, _ = np.linalg.qr(G @ X)
    raise ConvergenceError(
        f"top eigenpair did not converge in {max_iter} iterations "
        f"(residual {best[2]:.3e})",
        best=best,
    )


def top_singular_triplet(M, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER, v0=None, seed=0):
    """Largest singular value of ``M`` with its singular vectors.

    Parameters
    ----------
    M : array_like, shape (n, m)
    tol : float
        Relative residual tolerance on the Gram eigen-equation.
    max_iter : int
    v0 : array_like, optional
        Warm start for the right singular vector (length m).
    seed : int
        Seed for the random part of the starting block.

    Returns
    -------
    RankOneFactor
        ``sigma >= 0``; ``u``, ``v`` unit vectors with ``M v = sigma u``.
        The first nonzero entry of ``u`` is nonnegative.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    M = as_matrix(M)
    n, m = M.shape
    if not np.any(M):
        return RankOneFactor(0.0, np.eye(n)[0], np.eye(m)[0])
    if n == 1 or m == 1:
        x = M.ravel()
        s = np.linalg.norm(x)
        if s == 0:  # subnormal entries whose norm underflows
            return RankOneFactor(0.0, np.eye(n)[0], np.eye(m)[0])
        if n == 1:
            u, v = _fix_sign(np.ones(1), x / s)
        else:
            u, v = _fix_sign(x / s, np.ones(1))
        return RankOneFactor(float(s), u, v)

    rng = np.random.default_rng(seed)
    transposed = n < m
    W = M.T if transposed else M
    start = None
    if v0 is not None and not transposed:
        start = np.asarray(v0, dtype=float)
    elif v0 is not None and transposed:
        # a right vector of M is a left vector of W; map it across
        start = M @ np.asarray(v0, dtype=float)
    G = W.T @ W
    try:
        _, x, _ = _top_eigvec_psd(G, start, rng, tol, max_iter, block=3)
    except ConvergenceError as exc:
        lam, x, _ = exc.best
        exc.best = _factor_from(W, x, transposed)
        raise
    return _factor_from(W, x, transposed)


def _factor_from(W, x, transposed):
    y = W @ x
    s = np.linalg.norm(y)
    y = y / s if s > 0 else np.eye(len(y))[0]
    if transposed:
        u, v = _fix_sign(x, y)
    else:
        u, v = _fix_sign(y, x)
    return RankOneFactor(float(s), u, v)


def rank_one_residual(M, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER):
    """Squared Frobenius distance from ``M`` to its best rank-one approximation.

    Computed as ``||M||_F^2 - sigma_1^2``, clipped at zero. Single-row and
    single-column matrices are exactly rank one, so they return 0.
    """
    M = as_matrix(M)
    if M.shape[0] == 1 or M.shape[1] == 1:
        return 0.0
    f = frobenius_sq(M)
    s = top_singular_triplet(M, tol=tol, max_iter=max_iter).sigma
    return max(f - s * s, 0.0)


def _orthonormal_fill(U, ok, rng):
    # replace unusable columns by an orthonormal completion of the good ones
    if ok.all():
        return U
    good = U[:, ok]
    R = rng.standard_normal((U.shape[0], int((~ok).sum())))
    if good.shape[1]:
        R -= good @ (good.T @ R)
    Qr, _ = np.linalg.qr(R)
    if good.shape[1]:
        Qr -= good @ (good.T @ Qr)
        Qr, _ = np.linalg.qr(Qr)
    U = U.copy()
    U[:, ~ok] = Qr
    return U


def truncated_svd(M, rank, tol=1e-8, max_iter=500, oversample=8, seed=0):
    """Leading ``rank`` singular triplets of ``M`` by block power iteration.

    Returns ``(U, s, V)`` with ``U`` of shape (n, rank), ``s`` descending and
    ``V`` of shape (m, rank). Each column pair is sign-fixed so that the first
    nonzero entry of the ``U`` column is nonnegative.
    """
    M = as_matrix(M)
    n, m = M.shape
    if rank < 1 or rank > min(n, m):
        raise ValueError(f"rank must be in [1, {min(n, m)}], got {rank}")
    rng = np.random.default_rng(seed)
    p = min(rank + oversample, min(n, m))
    Q, _ = np.linalg.qr(rng.standard_normal((m, p)))
    total = frobenius_sq(M)
    converged = False
    for _ in range(max_iter):
        B = M @ Q
        H = B.T @ B
        theta, Y = np.linalg.eigh((H + H.T) / 2)
        theta, Y = theta[::-1], Y[:, ::-1]
        V = Q @ Y
        lam = np.clip(theta, 0.0, None)
        R = M.T @ (M @ V[:, :rank]) - V[:, :rank] * lam[:rank]
        resid = np.linalg.norm(R, axis=0)
        if np.all(resid <= tol * max(lam[0], tol * total)):
            converged = True
            break
        W, _ = np.linalg.qr(M @ V)
        Q, _ = np.linalg.qr(M.T @ W)
    if not converged:
        raise ConvergenceError(
            f"truncated SVD did not converge in {max_iter} iterations",
            best=(V[:, :rank], np.sqrt(lam[:rank])),
        )
    s = np.sqrt(lam[:rank])
    V = V[:, :rank]
    U = M @ V
    # Gram eigenvalues carry ~eps relative error, so singular values below
    # ~sqrt(eps) of the largest are numerically zero
    ok = s > 1e-7 * max(s[0], np.finfo(float).tiny)
    U[:, ok] /= s[ok]
    s = np.where(ok, s, 0.0)
    U = _orthonormal_fill(U, ok, rng)
    for j in range(rank):
        U[:, j], V[:, j] = _fix_sign(U[:, j], V[:, j])
    return U, s, V


def top_eigh(S, rank, tol=1e-8, max_iter=500, oversample=8, seed=0):
    """Leading ``rank`` eigenpairs of a symmetric PSD matrix (descending)."""
    S = as_matrix(S)
    if S.shape[0] != S.shape[1]:
        raise ValueError("matrix must be square")
    d = S.shape[0]
    if rank < 1 or rank > d:
        raise ValueError(f"rank must be in [1, {d}], got {rank}")
    rng = np.random.default_rng(seed)
    p = min(rank + oversample, d)
    X, _ = np.linalg.qr(rng.standard_normal((d, p)))
    scale = max(np.abs(S).max(), np.finfo(float).tiny)
    for _ in range(max_iter):
        H = X.T @ S @ X
        theta, Y = np.linalg.eigh((H + H.T) / 2)
        theta, Y = theta[::-1], Y[:, ::-1]
        X = X @ Y
        R = S @ X[:, :rank] - X[:, :rank] * theta[:rank]
        if np.all(np.linalg.norm(R, axis=0) <= tol * max(abs(theta[0]), tol * scale)):
            vecs = X[:, :rank].copy()
            for j in range(rank):
                (vecs[:, j],) = _fix_sign(vecs[:, j])
            return theta[:rank], vecs
        X, _ = np.linalg.qr(S @ X)
    raise ConvergenceError(
        f"eigenpairs did not converge in {max_iter} iterations",
        best=(theta[:rank], X[:, :rank]),
    )
