import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tnpm.model import (
    Assignment,
    EmptyClusterError,
    TnpmParams,
    block_view,
    blocks,
    groups,
    partition_from,
    probability_matrix,
    rearrange,
)


def test_all_ones_params():
    a = Assignment([0, 1, 0], [1, 0], 2, 2)
    P = probability_matrix(TnpmParams(np.ones((3, 2)), np.ones((2, 2))), a)
    np.testing.assert_array_equal(P, np.ones((3, 2)))


def test_scalar_case():
    a = Assignment([0, 0], [0, 0], 1, 1)
    P = probability_matrix(TnpmParams([[0.5], [1.0]], [[0.2], [0.4]]), a)
    np.testing.assert_allclose(P, [[0.1, 0.2], [0.2, 0.4]])


def test_blocks_are_rank_one():
    rng = np.random.default_rng(0)
    a = Assignment(rng.permutation([0] * 5 + [1] * 4), rng.permutation([0] * 3 + [1] * 6), 2, 2)
    P = probability_matrix(TnpmParams(rng.random((9, 2)), rng.random((9, 2))), a)
    for row in blocks(P, a):
        for B in row:
            assert np.linalg.svd(B, compute_uv=False)[1] < 1e-10


def test_probability_entrywise():
    rng = np.random.default_rng(1)
    a = Assignment([0, 1, 2, 1], [1, 0, 1], 3, 2)
    lam, lt = rng.random((4, 2)), rng.random((3, 3))
    P = probability_matrix(TnpmParams(lam, lt), a)
    for i in range(4):
        for j in range(3):
            assert P[i, j] == lam[i, a.z[j]] * lt[j, a.c[i]]


def test_groups_examples():
    assert [g.tolist() for g in groups(np.array([0, 0, 1]), 2)] == [[0, 1], [2]]
    assert [g.tolist() for g in groups(np.array([0, 0, 0]), 1)] == [[0, 1, 2]]
    assert [g.tolist() for g in groups(np.array([1, 0, 1]), 2)] == [[1], [0, 2]]


def test_block_view():
    A = np.arange(16.0).reshape(4, 4)
    a = Assignment([0, 0, 0, 0], [0, 0, 0, 0], 1, 1)
    np.testing.assert_array_equal(block_view(A, partition_from(a), 0, 0), A)
    a = Assignment([0, 1, 0, 1], [0, 1, 0, 1], 2, 2)
    np.testing.assert_array_equal(block_view(A, partition_from(a), 0, 1), A[np.ix_([0, 2], [1, 3])])


def test_empty_block_errors():
    a = Assignment([0, 0], [0, 0], 2, 1, allow_empty=True)
    with pytest.raises(EmptyClusterError):
        block_view(np.ones((2, 2)), partition_from(a), 1, 0)
    with pytest.raises(EmptyClusterError):
        Assignment([0, 0], [0, 0], 2, 1)


def test_label_validation():
    with pytest.raises(ValueError):
        Assignment([0, 2], [0], 2, 1)
    with pytest.raises(ValueError):
        Assignment([0.5, 1], [0], 2, 1)
    with pytest.raises(ValueError):
        TnpmParams(-np.ones((2, 1)), np.ones((2, 1)))


def test_rearrange_examples():
    A = np.arange(12.0).reshape(4, 3)
    a = Assignment([0, 0, 1, 1], [0, 1, 1], 2, 2)
    B, rb, cb = rearrange(A, a)
    np.testing.assert_array_equal(B, A)
    assert rb.tolist() == [0, 2, 4] and cb.tolist() == [0, 1, 3]
    B, _, _ = rearrange(A, Assignment([1, 1, 0, 0], [0, 1, 1], 2, 2))
    np.testing.assert_array_equal(B, A[[2, 3, 0, 1]])


def test_transpose_and_equality():
    a = Assignment([0, 1, 1], [1, 0], 2, 2)
    assert a.transpose().transpose() == a
    assert a.transpose().n == 2


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 4), st.integers(1, 4), st.integers(0, 10_000))
def test_rearrange_is_a_permutation(K, L, seed):
    rng = np.random.default_rng(seed)
    n, m = K + 5, L + 4
    c = np.concatenate([np.arange(K), rng.integers(0, K, n - K)])
    z = np.concatenate([np.arange(L), rng.integers(0, L, m - L)])
    a = Assignment(rng.permutation(c), rng.permutation(z), K, L)
    A = rng.random((n, m))
    B, rb, cb = rearrange(A, a)
    assert sorted(B.ravel()) == sorted(A.ravel())
    for k in range(K):
        for l in range(L):
            blk = B[rb[k]:rb[k + 1], cb[l]:cb[l + 1]]
            np.testing.assert_array_equal(blk, block_view(A, partition_from(a), k, l))
