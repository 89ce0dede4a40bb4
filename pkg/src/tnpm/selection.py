"""Penalized choice of the numbers of out- and in-communities."""
import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .dom import FitConfig, fit_dom, total_loss
from .initialization import KMeansConfig, svd_kmeans_init
from .linalg import as_matrix, top_singular_triplet
from .tsdc import fit_tsdc

log = logging.getLogger(__name__)

RHO_MODES = ("mean_abs", "spectral")


@dataclass(frozen=True)
class PenaltyConfig:
    """Penalty settings.

    ``sigma_tilde_sq_max=None`` asks :func:`select_kl` to plug in 1.5 times
    the residual variance of the most flexible fitted model in the grid.
    """

    variant: str = "empirical"
    sigma_tilde_sq_max: float = None
    alpha1: float = 0.1
    alpha2: float = 0.1
    c_const: float = 1.0
    rho_mode: str = "mean_abs"

    def __post_init__(self):
        if self.variant not in ("theoretical", "empirical"):
            raise ValueError(f"unknown penalty variant {self.variant!r}")
        if self.rho_mode not in RHO_MODES:
            raise ValueError(f"rho_mode must be one of {RHO_MODES}")
        if self.sigma_tilde_sq_max is not None and self.sigma_tilde_sq_max <= 0:
            raise ValueError("sigma_tilde_sq_max must be positive")
        if min(self.alpha1, self.alpha2, self.c_const) <= 0:
            raise ValueError("alpha1, alpha2 and c_const must be positive")
        if self.alpha1 + 4 * self.alpha2 >= 1:
            raise ValueError("need alpha1 + 4 * alpha2 < 1")


def _log(x):
    return math.log(x) if x > 1 else 0.0


def complexity_terms(n, m, K, L, c_const=1.0):
    """The two complexity terms ``(F1, F2)`` of the theoretical penalty."""
    F2 = n * _log(K) + _log(n) + m * _log(L) + _log(m)
    F1 = c_const * (n * L + m * K + K * L * math.log(2 * K * L) + K * L * F2)
    return F1, F2


def penalty_theoretical(n, m, K, L, cfg):
    if K < 1 or L < 1:
        raise ValueError("K and L must be >= 1")
    if cfg.sigma_tilde_sq_max is None:
        raise ValueError("sigma_tilde_sq_max must be set for the theoretical penalty")
    F1, F2 = complexity_terms(n, m, K, L, cfg.c_const)
    return 2 * cfg.sigma_tilde_sq_max * ((1 + 1 / cfg.alpha2) * F1 + F2 / cfg.alpha1)


def density(A, mode="mean_abs"):
    """Scale proxy for the empirical penalty.

    ``mean_abs`` is the mean absolute entry; ``spectral`` is
    ``sigma_1(A) / sqrt(n m)``.
    """
    A = as_matrix(A)
    if mode == "mean_abs":
        return float(np.abs(A).mean())
    if mode == "spectral":
        return top_singular_triplet(A).sigma / math.sqrt(A.size)
    raise ValueError(f"rho_mode must be one of {RHO_MODES}")


def empirical_penalty_value(n, m, K, L, rho):
    return rho * (
        n * L * math.sqrt(_log(n) * _log(L) ** 3) + m * K * math.sqrt(_log(m) * _log(K) ** 3)
    )


def penalty_empirical(A, K, L, cfg):
    A = as_matrix(A)
    n, m = A.shape
    return empirical_penalty_value(n, m, K, L, density(A, cfg.rho_mode))


@dataclass(frozen=True)
class GridCell:
    K: int
    L: int
    loss: float
    penalty: float
    labels: object = None
    error: str = None

    @property
    def score(self):
        return self.loss + self.penalty


@dataclass(frozen=True)
class SelectionResult:
    K: int
    L: int
    table: tuple

    def cell(self, K, L):
        for c in self.table:
            if (c.K, c.L) == (K, L):
                return c
        raise KeyError((K, L))


FITTERS = {"dom": fit_dom, "tsdc": fit_tsdc}


def _workers():
    try:
        return max(1, int(os.environ.get("TNPM_THREADS", "1")))
    except ValueError:
        return 1


def select_kl(
    A,
    k_grid,
    l_grid,
    fitter="dom",
    penalty=PenaltyConfig(),
    fit_cfg=FitConfig(),
    kmeans_cfg=KMeansConfig(),
):
    """Fit every ``(K, L)`` in the grid and minimize loss plus penalty.

    The loss of a cell is the block rank-one loss of the fitted labels. Ties
    go to the smaller ``K + L``, then the smaller ``K``. Cells whose fit
    raises are recorded with ``error`` set and excluded.
    """
    A = as_matrix(A)
    n, m = A.shape
    k_grid, l_grid = list(k_grid), list(l_grid)
    if not k_grid or not l_grid:
        raise ValueError("grids must be nonempty")
    fit = FITTERS[fitter] if isinstance(fitter, str) else fitter
    if 1 in k_grid or 1 in l_grid:
        log.warning("K = 1 or L = 1 in the grid: the empirical penalty is 0 there")

    def run(KL):
        K, L = KL
        try:
            init = svd_kmeans_init(A, K, L, kmeans_cfg)
            res = fit(A, K, L, init, fit_cfg)
            return K, L, total_loss(A, res.assignment), res.assignment, None
        except Exception as exc:  # recorded per cell
            return K, L, math.nan, None, f"{type(exc).__name__}: {exc}"

    cells = [(K, L) for K in k_grid for L in l_grid]
    with ThreadPoolExecutor(max_workers=_workers()) as pool:
        fitted = list(pool.map(run, cells))

    if penalty.variant == "theoretical" and penalty.sigma_tilde_sq_max is None:
        ok = [f for f in fitted if f[4] is None]
        if not ok:
            raise RuntimeError("every grid cell failed")
        K, L, loss = max(ok, key=lambda f: (f[0] * f[1], f[0]))[:3]
        penalty = replace(penalty, sigma_tilde_sq_max=1.5 * max(loss, 1e-12) / (n * m))
    rho = density(A, penalty.rho_mode) if penalty.variant == "empirical" else None

    table = []
    for K, L, loss, labels, err in fitted:
        if penalty.variant == "empirical":
            pen = empirical_penalty_value(n, m, K, L, rho)
        else:
            pen = penalty_theoretical(n, m, K, L, penalty)
        table.append(GridCell(K, L, loss, pen, labels, err))
    ok = [c for c in table if c.error is None]
    if not ok:
        raise RuntimeError("every grid cell failed: " + "; ".join(c.error for c in table))
    best = min(ok, key=lambda c: (c.score, c.K + c.L, c.K))
    return SelectionResult(best.K, best.L, tuple(table))
