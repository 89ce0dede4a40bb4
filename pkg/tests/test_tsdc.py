import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from tnpm.generator import GeneratorConfig, generate
from tnpm.initialization import svd_kmeans_init
from tnpm.metrics import nmi
from tnpm.model import Assignment, groups
from tnpm.tsdc import (
    CenterSet,
    assign_cols,
    assign_rows,
    block_cos,
    fit_tsdc,
    segment_normalize,
    update_centers,
)

G3 = [np.array([0, 1]), np.array([2, 3]), np.array([4, 5])]


def test_block_cos_examples():
    x = np.array([1.0, 2, 3, 4, 5, 6])
    assert block_cos(x, x, G3) == pytest.approx(3.0)
    y = np.array([2.0, -1, 4, -3, 6, -5])
    assert block_cos(x, y, G3) == pytest.approx(0.0, abs=1e-15)
    x0 = x.copy()
    x0[2:4] = 0
    assert block_cos(x0, x, G3) == pytest.approx(2.0)


def test_center_of_two_unit_rows():
    A = np.array([[1.0, 0.0], [0.0, 1.0]])
    a = Assignment([0, 0], [0, 0], 1, 1)
    np.testing.assert_allclose(update_centers(A, a).mu, [[1.0, 1.0]])


def test_single_row_cluster_center():
    A = np.array([[3.0, 1.0, 0.0], [1.0, 1.0, 1.0], [2.0, 2.0, 2.0]])
    a = Assignment([0, 1, 1], [0, 0, 1], 2, 2)
    mu = update_centers(A, a).mu
    np.testing.assert_allclose(mu[0, :2], np.array([3.0, 1.0]) / 4 * 2)


def test_row_equal_to_center_and_zero_row():
    rng = np.random.default_rng(0)
    mu = rng.random((3, 6))
    z = np.array([0, 0, 1, 1, 2, 2])
    X = np.vstack([mu[2], mu[1], np.zeros(6)])
    assert assign_rows(X, CenterSet(mu, None), z).tolist() == [2, 1, 0]


def test_noiseless_assignment_with_true_centers():
    net = generate(GeneratorConfig(80, 80, 3, 4, sigma=0.0, seed=3, general_position=True))
    cs = update_centers(net.A, net.truth)
    np.testing.assert_array_equal(assign_rows(net.A, cs, net.truth.z), net.truth.c)
    np.testing.assert_array_equal(assign_cols(net.A, cs, net.truth.c), net.truth.z)


def test_assign_cols_is_transposed_assign_rows():
    rng = np.random.default_rng(1)
    A = rng.random((10, 8))
    a = Assignment(rng.permutation([0] * 5 + [1] * 5), rng.permutation([0] * 4 + [1] * 2 + [2] * 2), 2, 3)
    cs = update_centers(A, a)
    flipped = CenterSet(cs.mu_tilde.T, cs.mu.T)
    np.testing.assert_array_equal(assign_cols(A, cs, a.c), assign_rows(A.T, flipped, a.c))


def test_noiseless_recovery():
    net = generate(GeneratorConfig(200, 200, 3, 4, sigma=0.0, seed=5))
    res = fit_tsdc(net.A, 3, 4, svd_kmeans_init(net.A, 3, 4))
    assert nmi(res.assignment.c, net.truth.c) == 1.0
    assert nmi(res.assignment.z, net.truth.z) == 1.0


def test_fixed_point_at_truth():
    net = generate(GeneratorConfig(60, 60, 2, 3, sigma=0.0, seed=2))
    res = fit_tsdc(net.A, 2, 3, net.truth)
    assert res.sweeps == 1 and res.assignment == net.truth


def test_clusters_stay_nonempty():
    A = np.ones((6, 6))
    A[0] = 0
    res = fit_tsdc(A, 3, 2, Assignment([0, 1, 2, 0, 1, 2], [0, 1, 0, 1, 0, 1], 3, 2))
    assert res.assignment.row_sizes().min() > 0


vec = arrays(np.float64, 6, elements=st.floats(-5, 5, allow_nan=False))


@settings(max_examples=100, deadline=None)
@given(vec, vec)
def test_block_cos_symmetric_and_bounded(x, y):
    s = block_cos(x, y, G3)
    assert s == pytest.approx(block_cos(y, x, G3), abs=1e-12)
    assert -3 - 1e-12 <= s <= 3 + 1e-12
    nz = sum(np.linalg.norm(x[g]) > 0 for g in G3)
    assert block_cos(x, x, G3) == pytest.approx(nz, abs=1e-12)


@settings(max_examples=50, deadline=None)
@given(vec, st.floats(0.01, 100))
def test_block_cos_scale_invariant(x, a):
    y = np.arange(1.0, 7.0)
    assert block_cos(a * x, y, G3) == pytest.approx(block_cos(x, y, G3), abs=1e-9)


def test_segment_normalize_matches_block_cos():
    rng = np.random.default_rng(2)
    X = rng.standard_normal((5, 6))
    z = np.array([0, 0, 1, 1, 2, 2])
    R = segment_normalize(X, z, 3)
    S = R @ R.T
    g = groups(z, 3)
    for i in range(5):
        for j in range(5):
            assert S[i, j] == pytest.approx(block_cos(X[i], X[j], g), abs=1e-12)
