import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tnpm.dom import (
    FitConfig,
    col_delta,
    col_deltas,
    fit_dom,
    row_delta,
    row_deltas,
    top_eig_rank_one,
    total_loss,
)
from tnpm.generator import GeneratorConfig, generate
from tnpm.linalg import rank_one_residual
from tnpm.model import Assignment, EmptyClusterError


def svd_loss(A, c, z, K, L):
    """Block rank-one loss from full SVDs of explicit residual matrices."""
    total = 0.0
    for k in range(K):
        for l in range(L):
            B = A[np.ix_(c == k, z == l)]
            if B.size == 0:
                continue
            U, s, Vt = np.linalg.svd(B, full_matrices=False)
            total += float(((B - s[0] * np.outer(U[:, 0], Vt[0])) ** 2).sum())
    return total


def random_assignment(rng, n, m, K, L):
    c = rng.permutation(np.concatenate([np.arange(K), rng.integers(0, K, n - K)]))
    z = rng.permutation(np.concatenate([np.arange(L), rng.integers(0, L, m - L)]))
    return Assignment(c, z, K, L)


def test_loss_zero_at_truth():
    net = generate(GeneratorConfig(30, 25, 2, 3, sigma=0.0, seed=1))
    assert total_loss(net.P, net.truth) < 1e-8


def test_single_block_loss():
    A = np.random.default_rng(0).random((7, 5))
    a = Assignment(np.zeros(7, int), np.zeros(5, int), 1, 1)
    assert total_loss(A, a) == pytest.approx(rank_one_residual(A), abs=1e-12)


def test_loss_matches_explicit_residuals():
    rng = np.random.default_rng(8)
    A = rng.standard_normal((8, 8))
    a = random_assignment(rng, 8, 8, 2, 2)
    assert abs(total_loss(A, a) - svd_loss(A, a.c, a.z, 2, 2)) < 1e-8


def test_row_delta_differences_match_full_objective():
    rng = np.random.default_rng(3)
    A = rng.standard_normal((12, 10))
    a = random_assignment(rng, 12, 10, 3, 2)
    for i in range(12):
        if np.sum(a.c == a.c[i]) == 1:
            continue
        d = row_deltas(A, a, i)
        full = []
        for k in range(3):
            c = a.c.copy()
            c[i] = k
            full.append(svd_loss(A, c, a.z, 3, 2))
        np.testing.assert_allclose(d - d[0], np.array(full) - full[0], atol=1e-8)


def test_col_delta_is_row_delta_of_transpose():
    rng = np.random.default_rng(4)
    A = rng.standard_normal((9, 11))
    a = random_assignment(rng, 9, 11, 2, 3)
    for j in range(11):
        np.testing.assert_allclose(col_deltas(A, a, j), row_deltas(A.T, a.transpose(), j), atol=1e-12)


def test_noiseless_row_delta_points_to_truth():
    net = generate(GeneratorConfig(40, 40, 3, 3, sigma=0.0, seed=2, general_position=True))
    a = net.truth
    for i in range(40):
        if np.sum(a.c == a.c[i]) > 1:
            assert int(np.argmin(row_deltas(net.A, a, i))) == a.c[i]
    for j in range(40):
        if np.sum(a.z == a.z[j]) > 1:
            assert int(np.argmin(col_deltas(net.A, a, j))) == a.z[j]


def test_duplicate_candidate_blocks_equal_deltas():
    rng = np.random.default_rng(5)
    X = rng.random((4, 6))
    A = np.vstack([X, X, rng.random((3, 6))])
    a = Assignment([0] * 4 + [1] * 4 + [2] * 3, [0, 0, 0, 1, 1, 1], 3, 2)
    d = row_deltas(A, a, 9)
    assert d[0] == pytest.approx(d[1], abs=1e-12)


def test_delta_emptiness_guard():
    A = np.random.default_rng(0).random((4, 4))
    a = Assignment([0, 1, 1, 1], [0, 0, 1, 1], 2, 2)
    with pytest.raises(EmptyClusterError):
        row_delta(A, a, 0, 1)
    with pytest.raises(EmptyClusterError):
        col_delta(A, Assignment([0, 0, 1, 1], [0, 1, 1, 1], 2, 2), 0, 1)
    assert np.isfinite(row_delta(A, a, 1, 0))


def test_fixed_point_at_truth():
    net = generate(GeneratorConfig(60, 60, 2, 2, sigma=0.0, seed=6))
    res = fit_dom(net.A, 2, 2, net.truth)
    assert res.sweeps == 1 and res.converged
    assert res.loss < 1e-8
    assert res.assignment == net.truth


def test_exhaustive_small():
    rng = np.random.default_rng(7)
    A = rng.standard_normal((5, 5))
    best = np.inf
    for c in itertools.product([0, 1], repeat=5):
        for z in itertools.product([0, 1], repeat=5):
            if len(set(c)) == 2 and len(set(z)) == 2:
                best = min(best, svd_loss(A, np.array(c), np.array(z), 2, 2))
    fits = []
    for c in itertools.product([0, 1], repeat=5):
        if c[0] or len(set(c)) < 2:
            continue
        for z in itertools.product([0, 1], repeat=5):
            if z[0] or len(set(z)) < 2:
                continue
            fits.append(fit_dom(A, 2, 2, Assignment(c, z, 2, 2)).loss)
    assert min(fits) == pytest.approx(best, abs=1e-9)


def test_init_mismatch():
    with pytest.raises(ValueError):
        fit_dom(np.ones((4, 4)), 3, 2, Assignment([0, 1, 0, 1], [0, 1, 0, 1], 2, 2))


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 8), st.integers(0, 2**31), st.sampled_from([1, -1]))
def test_rank_one_eigen_update(d, seed, sign):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((d + 2, d))
    if sign < 0:
        w = X[0].copy()
    else:
        w = rng.standard_normal(d) * rng.choice([1e-6, 1.0, 10.0])
        if rng.random() < 0.3:
            X = X[:, :1] * rng.standard_normal((1, d))  # repeated zero eigenvalues
    G = X.T @ X
    lam, Q = np.linalg.eigh(G)
    got = top_eig_rank_one(lam, Q.T @ w, sign)
    want = np.linalg.eigvalsh(G + sign * np.outer(w, w))[-1]
    assert abs(got - want) <= 1e-9 * max(1.0, abs(want))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000), st.integers(2, 3), st.integers(2, 3))
def test_trajectory_non_increasing(seed, K, L):
    net = generate(GeneratorConfig(24, 20, K, L, sigma=0.3, seed=seed))
    rng = np.random.default_rng(seed)
    res = fit_dom(net.A, K, L, random_assignment(rng, 24, 20, K, L), FitConfig(max_iter=20))
    t = np.array(res.loss_trajectory)
    assert np.all(np.diff(t) <= 1e-9 * t[0])
    assert res.loss == pytest.approx(total_loss(net.A, res.assignment), abs=1e-8)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10_000))
def test_relabeling_equivariance(seed):
    net = generate(GeneratorConfig(20, 18, 3, 2, sigma=0.3, seed=seed))
    rng = np.random.default_rng(seed)
    a = random_assignment(rng, 20, 18, 3, 2)
    pk, pl = rng.permutation(3), rng.permutation(2)
    b = Assignment(pk[a.c], pl[a.z], 3, 2)
    ra, rb = fit_dom(net.A, 3, 2, a), fit_dom(net.A, 3, 2, b)
    np.testing.assert_array_equal(pk[ra.assignment.c], rb.assignment.c)
    np.testing.assert_array_equal(pl[ra.assignment.z], rb.assignment.z)
    np.testing.assert_allclose(ra.loss_trajectory, rb.loss_trajectory, rtol=1e-10)
