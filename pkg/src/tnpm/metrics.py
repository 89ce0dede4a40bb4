"""Agreement between clusterings and a chi-squared association test."""
import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.special import gammaincc

ENUMERATION_MAX_K = 8


@dataclass(frozen=True)
class ConfusionTable:
    counts: np.ndarray

    def __post_init__(self):
        counts = np.asarray(self.counts)
        if counts.ndim != 2 or np.any(counts < 0):
            raise ValueError("counts must be a nonnegative 2-D table")
        object.__setattr__(self, "counts", counts)

    @property
    def total(self):
        return int(self.counts.sum())


def _pair(labels, truth):
    x = np.asarray(labels).astype(np.int64).ravel()
    y = np.asarray(truth).astype(np.int64).ravel()
    if x.size != y.size:
        raise ValueError(f"label vectors differ in length ({x.size} vs {y.size})")
    if x.size == 0:
        raise ValueError("label vectors are empty")
    if x.min() < 0 or y.min() < 0:
        raise ValueError("labels must be nonnegative")
    return x, y


def confusion_table(labels, truth, k=None, k_truth=None):
    """Co-occurrence counts; rows index ``labels``, columns index ``truth``."""
    x, y = _pair(labels, truth)
    r = k if k is not None else int(x.max()) + 1
    c = k_truth if k_truth is not None else int(y.max()) + 1
    if x.max() >= r or y.max() >= c:
        raise ValueError("labels exceed the declared number of clusters")
    counts = np.zeros((r, c), dtype=np.int64)
    np.add.at(counts, (x, y), 1)
    return ConfusionTable(counts)


@lru_cache(maxsize=None)
def _perms(k):
    return np.array(list(itertools.permutations(range(k))), dtype=np.int64)


def matched_by_enumeration(counts):
    """Largest diagonal sum over all column permutations of a square table."""
    k = counts.shape[0]
    P = _perms(k)
    return int(counts[np.arange(k), P].sum(axis=1).max())


def matched_by_assignment(counts):
    rows, cols = linear_sum_assignment(counts, maximize=True)
    return int(counts[rows, cols].sum())


def min_perm_error(labels, truth, k=None, method="auto"):
    """Fraction of nodes misclassified under the best relabeling.

    Equals ``(2n)^-1 min_P ||C P - C*||_1`` for the one-hot membership
    matrices. ``method`` is ``"enumerate"`` (all k! permutations),
    ``"assignment"`` (Hungarian) or ``"auto"`` (enumerate for k <= 8).
    """
    x, y = _pair(labels, truth)
    if k is None:
        k = int(max(x.max(), y.max())) + 1
    counts = confusion_table(x, y, k, k).counts
    if method == "auto":
        method = "enumerate" if k <= ENUMERATION_MAX_K else "assignment"
    if method == "enumerate":
        matched = matched_by_enumeration(counts)
    elif method == "assignment":
        matched = matched_by_assignment(counts)
    else:
        raise ValueError(f"unknown method {method!r}")
    return (x.size - matched) / x.size


def _entropy(p):
    p = p[p > 0]
    return float(-(p * np.log(p)).sum())


def nmi(labels, truth, variant="arithmetic"):
    """Normalized mutual information with natural logs.

    ``arithmetic`` divides by the mean of the two entropies, ``max`` by the
    larger one. Two single-cluster partitions give 1.
    """
    x, y = _pair(labels, truth)
    _, xi = np.unique(x, return_inverse=True)
    _, yi = np.unique(y, return_inverse=True)
    counts = confusion_table(xi, yi).counts
    nz_count = (counts > 0).sum()
    if nz_count == counts.shape[0] == counts.shape[1]:
        return 1.0  # identical up to relabeling; avoid rounding below 1
    joint = counts / x.size
    px, py = joint.sum(1), joint.sum(0)
    hx, hy = _entropy(px), _entropy(py)
    if hx == 0 and hy == 0:
        return 1.0
    nz = joint > 0
    mi = float((joint[nz] * np.log(joint[nz] / np.outer(px, py)[nz])).sum())
    if variant == "arithmetic":
        denom = 0.5 * (hx + hy)
    elif variant == "max":
        denom = max(hx, hy)
    else:
        raise ValueError(f"unknown NMI variant {variant!r}")
    return float(min(max(mi / denom, 0.0), 1.0))


def chi2_independence(table):
    """Pearson chi-squared test of independence.

    Returns ``(statistic, dof, p_value)``; the p-value is the upper
    regularized incomplete gamma function ``Q(dof/2, statistic/2)``.
    """
    counts = table.counts if isinstance(table, ConfusionTable) else np.asarray(table)
    counts = np.asarray(counts, dtype=float)
    rs, cs = counts.sum(1), counts.sum(0)
    if np.any(rs == 0) or np.any(cs == 0):
        raise ValueError("every row and column of the table needs a positive total")
    expected = np.outer(rs, cs) / counts.sum()
    stat = float(((counts - expected) ** 2 / expected).sum())
    dof = (counts.shape[0] - 1) * (counts.shape[1] - 1)
    if dof == 0:
        return stat, 0, 1.0
    return stat, dof, float(gammaincc(dof / 2, stat / 2))
