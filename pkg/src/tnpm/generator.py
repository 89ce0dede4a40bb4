"""Synthetic TNPM networks for benchmarks and tests.

Randomness is drawn from independent streams derived from a single root seed:
stream ``[seed, 0]`` for community labels, ``[seed, 1 + attempt]`` for the
popularity parameters (``attempt`` counts general-position rejections) and
``[seed, 1000]`` for the edge weights.
"""
from dataclasses import dataclass

import numpy as np

from .model import Assignment, TnpmParams, probability_matrix

FAMILIES = ("normal", "bernoulli", "poisson", "mixture")
BENCHMARK_ETAS = (0.3, 0.5, 0.7)

_LABEL_STREAM = 0
_PARAM_STREAM = 1
_EDGE_STREAM = 1000


@dataclass(frozen=True)
class GeneratorConfig:
    n: int
    m: int
    k_count: int
    l_count: int
    family: str = "normal"
    sigma: float = 0.1
    sparsity_eta: float = 0.0
    seed: int = 0
    general_position: bool = False
    max_attempts: int = 100

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"family must be one of {FAMILIES}, got {self.family!r}")
        if self.sigma < 0:
            raise ValueError("sigma must be >= 0")
        if not 0 <= self.sparsity_eta < 1:
            raise ValueError("sparsity_eta must lie in [0, 1)")
        if self.k_count < 1 or self.l_count < 1:
            raise ValueError("cluster counts must be >= 1")
        if self.n < self.k_count or self.m < self.l_count:
            raise ValueError("need n >= K and m >= L")


def _rng(cfg, stream):
    return np.random.default_rng([cfg.seed, stream])


def _uniform_labels(rng, size, count):
    while True:
        x = rng.integers(0, count, size=size)
        if np.unique(x).size == count:
            return x


def sample_assignments(cfg):
    """i.i.d. uniform labels, redrawn until no cluster is empty."""
    rng = _rng(cfg, _LABEL_STREAM)
    c = _uniform_labels(rng, cfg.n, cfg.k_count)
    z = _uniform_labels(rng, cfg.m, cfg.l_count)
    return Assignment(c, z, cfg.k_count, cfg.l_count)


def own_community_mask(labels, width):
    """Mask of exempt "own-community" positions of an n x width popularity matrix.

    Row ``i`` is exempt at column ``min(labels[i], width - 1)``.
    """
    mask = np.zeros((labels.size, width), dtype=bool)
    mask[np.arange(labels.size), np.minimum(labels, width - 1)] = True
    return mask


def _sparsify(x, mask, eta):
    count = int(np.floor(x.size * eta))
    eligible = np.flatnonzero(~mask.ravel())
    count = min(count, eligible.size)
    if count == 0:
        return x
    flat = x.ravel().copy()
    order = np.argsort(flat[eligible], kind="stable")
    flat[eligible[order[:count]]] = 0.0
    return flat.reshape(x.shape)


def general_position(params, a, tol=1e-6):
    """Numerical check that per-community popularity rows are in general position.

    For every out-community k the rows of ``lam`` restricted to ``N_k`` must
    have full column rank with relative smallest singular value above ``tol``
    and no two of them may be parallel to within ``tol``; the same is
    required of ``lam_tilde`` on every in-community.
    """

    def ok(X):
        if X.shape[0] < X.shape[1]:
            return False
        s = np.linalg.svd(X, compute_uv=False)
        if s[0] == 0 or s[-1] < tol * s[0]:
            return False
        norms = np.linalg.norm(X, axis=1)
        if np.any(norms == 0):
            return False
        Y = X / norms[:, None]
        cos = Y @ Y.T
        np.fill_diagonal(cos, 0.0)
        return bool(np.all(cos < 1 - tol))

    for k in range(a.k_count):
        if not ok(params.lam[a.c == k]):
            return False
    for l in range(a.l_count):
        if not ok(params.lam_tilde[a.z == l]):
            return False
    return True


def sample_params(cfg, a):
    """U[0, 1] popularity parameters, optionally sparsified.

    With ``cfg.sparsity_eta > 0`` the ``floor(n L eta)`` smallest entries of
    ``lam`` outside the own-community positions are set to zero, and likewise
    ``floor(m K eta)`` entries of ``lam_tilde``. With
    ``cfg.general_position`` the draw is repeated until
    :func:`general_position` holds.
    """
    for attempt in range(cfg.max_attempts):
        rng = _rng(cfg, _PARAM_STREAM + attempt)
        lam = rng.uniform(0.0, 1.0, size=(cfg.n, cfg.l_count))
        lam_t = rng.uniform(0.0, 1.0, size=(cfg.m, cfg.k_count))
        if cfg.sparsity_eta > 0:
            lam = _sparsify(lam, own_community_mask(a.c, cfg.l_count), cfg.sparsity_eta)
            lam_t = _sparsify(lam_t, own_community_mask(a.z, cfg.k_count), cfg.sparsity_eta)
        params = TnpmParams(lam, lam_t)
        if not cfg.general_position or general_position(params, a):
            return params
    raise RuntimeError(
        f"no general-position parameters found in {cfg.max_attempts} attempts"
    )


def _check_probabilities(P, where=None):
    bad = (P < 0) | (P > 1)
    if where is not None:
        bad &= where
    if bad.any():
        i, j = np.argwhere(bad)[0]
        raise ValueError(
            f"entry ({i + 1}, {j + 1}) = {P[i, j]!r} is not a probability"
        )


def sample_adjacency(P, cfg):
    """Draw ``A`` entrywise with ``E[A] = P`` from the configured family.

    The mixture family uses Bernoulli draws strictly below the diagonal
    (``j < i``) and Normal draws on and above it.
    """
    P = np.asarray(P, dtype=float)
    rng = _rng(cfg, _EDGE_STREAM)
    fam = cfg.family
    if fam == "normal":
        return P + cfg.sigma * rng.standard_normal(P.shape)
    if fam == "bernoulli":
        _check_probabilities(P)
        return (rng.random(P.shape) < P).astype(float)
    if fam == "poisson":
        if np.any(P < 0):
            i, j = np.argwhere(P < 0)[0]
            raise ValueError(f"entry ({i + 1}, {j + 1}) = {P[i, j]!r} is negative")
        return rng.poisson(P).astype(float)
    lower = np.tril(np.ones(P.shape, dtype=bool), k=-1)
    _check_probabilities(P, lower)
    bern = (rng.random(P.shape) < P).astype(float)
    norm = P + cfg.sigma * rng.standard_normal(P.shape)
    return np.where(lower, bern, norm)


@dataclass(frozen=True)
class SyntheticNetwork:
    A: np.ndarray
    P: np.ndarray
    truth: Assignment
    params: TnpmParams


def generate(cfg):
    """Labels, parameters, mean matrix and adjacency matrix in one call."""
    a = sample_assignments(cfg)
    params = sample_params(cfg, a)
    P = probability_matrix(params, a)
    return SyntheticNetwork(sample_adjacency(P, cfg), P, a, params)
