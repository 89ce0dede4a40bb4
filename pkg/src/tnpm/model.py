"""TNPM parameterization and block views of a matrix under a co-clustering.

Labels are 0-based everywhere inside the package; the IO layer converts to and
from the 1-based labels used in files and on the command line.
"""
from dataclasses import dataclass

import numpy as np

from .linalg import as_matrix


class EmptyClusterError(ValueError):
    pass


def _labels(x, count, name):
    x = np.asarray(x)
    if x.ndim != 1 or x.size < 1:
        raise ValueError(f"{name} must be a nonempty 1-D label vector")
    if not np.issubdtype(x.dtype, np.integer):
        if not np.all(np.equal(np.mod(x, 1), 0)):
            raise ValueError(f"{name} must hold integer labels")
    x = x.astype(np.int64)
    if count < 1:
        raise ValueError(f"number of {name} clusters must be >= 1")
    if x.min() < 0 or x.max() >= count:
        raise ValueError(f"{name} labels must lie in [0, {count - 1}]")
    return x


@dataclass(frozen=True, eq=False)
class Assignment:
    """Out-community labels ``c`` (length n) and in-community labels ``z`` (length m).

    By default every one of the ``k_count`` / ``l_count`` clusters must be
    used. Pass ``allow_empty=True`` to build a transient assignment with
    unused labels.
    """

    c: np.ndarray
    z: np.ndarray
    k_count: int
    l_count: int
    allow_empty: bool = False

    def __post_init__(self):
        c = _labels(self.c, self.k_count, "c")
        z = _labels(self.z, self.l_count, "z")
        c.setflags(write=False)
        z.setflags(write=False)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "z", z)
        if not self.allow_empty:
            for name, x, cnt in (("c", c, self.k_count), ("z", z, self.l_count)):
                missing = np.setdiff1d(np.arange(cnt), x)
                if missing.size:
                    raise EmptyClusterError(
                        f"{name}: clusters {missing.tolist()} have no members"
                    )

    @property
    def n(self):
        return self.c.size

    @property
    def m(self):
        return self.z.size

    def row_sizes(self):
        return np.bincount(self.c, minlength=self.k_count)

    def col_sizes(self):
        return np.bincount(self.z, minlength=self.l_count)

    def transpose(self):
        return Assignment(self.z, self.c, self.l_count, self.k_count, self.allow_empty)

    def __eq__(self, other):
        if not isinstance(other, Assignment):
            return NotImplemented
        return (
            self.k_count == other.k_count
            and self.l_count == other.l_count
            and np.array_equal(self.c, other.c)
            and np.array_equal(self.z, other.z)
        )

    def __repr__(self):
        return (
            f"Assignment(n={self.n}, m={self.m}, K={self.k_count}, L={self.l_count})"
        )


@dataclass(frozen=True)
class TnpmParams:
    """Popularity matrices: ``lam`` is n x L, ``lam_tilde`` is m x K."""

    lam: np.ndarray
    lam_tilde: np.ndarray

    def __post_init__(self):
        for name in ("lam", "lam_tilde"):
            x = as_matrix(getattr(self, name), name)
            if np.any(x < 0):
                raise ValueError(f"{name} must be nonnegative")
            object.__setattr__(self, name, x)


@dataclass(frozen=True)
class BlockPartition:
    row_groups: tuple
    col_groups: tuple

    @property
    def row_sizes(self):
        return np.array([len(g) for g in self.row_groups])

    @property
    def col_sizes(self):
        return np.array([len(g) for g in self.col_groups])


def probability_matrix(params, a):
    """Mean matrix with ``P[i, j] = lam[i, z_j] * lam_tilde[j, c_i]``."""
    n, L = params.lam.shape
    m, K = params.lam_tilde.shape
    if (n, m) != (a.n, a.m) or (K, L) != (a.k_count, a.l_count):
        raise ValueError(
            f"params are for (n, m, K, L)=({n}, {m}, {K}, {L}) but assignment "
            f"is ({a.n}, {a.m}, {a.k_count}, {a.l_count})"
        )
    return params.lam[:, a.z] * params.lam_tilde[:, a.c].T


def groups(labels, count):
    """Index arrays per label, each in increasing index order."""
    order = np.argsort(labels, kind="stable")
    bounds = np.searchsorted(labels[order], np.arange(count + 1))
    return tuple(order[bounds[k]:bounds[k + 1]] for k in range(count))


def partition_from(a):
    return BlockPartition(groups(a.c, a.k_count), groups(a.z, a.l_count))


def block_view(A, p, k, l):
    """Copy of ``A[N_k, M_l]`` with rows and columns in original order."""
    rows, cols = p.row_groups[k], p.col_groups[l]
    if len(rows) == 0 or len(cols) == 0:
        raise EmptyClusterError(f"block ({k}, {l}) is empty")
    return np.asarray(A, dtype=float)[np.ix_(rows, cols)]


def rearrange(A, a):
    """Permute rows and columns of ``A`` so that clusters are contiguous.

    Returns ``(B, row_boundaries, col_boundaries)``; boundaries are the
    cumulative cluster sizes starting at 0, so block ``(k, l)`` of ``B`` is
    ``B[rb[k]:rb[k+1], cb[l]:cb[l+1]]``.
    """
    A = as_matrix(A)
    if A.shape != (a.n, a.m):
        raise ValueError(f"matrix shape {A.shape} does not match assignment")
    ro = np.argsort(a.c, kind="stable")
    co = np.argsort(a.z, kind="stable")
    rb = np.concatenate([[0], np.cumsum(a.row_sizes())])
    cb = np.concatenate([[0], np.cumsum(a.col_sizes())])
    return A[np.ix_(ro, co)], rb, cb


def blocks(A, a):
    """All ``K * L`` blocks as a nested list ``[k][l]``."""
    p = partition_from(a)
    return [[block_view(A, p, k, l) for l in range(a.l_count)] for k in range(a.k_count)]
