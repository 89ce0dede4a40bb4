import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from tnpm.io import MatrixFormatError, parse_matrix, read_labels, write_labels, write_matrix


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_edge_list(tmp_path):
    p = write(tmp_path, "a.tsv", "# n=2 m=2\n1\t2\t0.5\n")
    np.testing.assert_array_equal(parse_matrix(p), [[0, 0.5], [0, 0]])


def test_edge_list_without_header(tmp_path):
    p = write(tmp_path, "a.tsv", "1\t3\t2\n2\t1\t1\n")
    assert parse_matrix(p).shape == (2, 3)


def test_dense_csv(tmp_path):
    np.testing.assert_array_equal(parse_matrix(write(tmp_path, "a.csv", "1,2\n3,4")), [[1, 2], [3, 4]])


def test_matrix_market_array(tmp_path):
    p = write(tmp_path, "a.mtx", "%%MatrixMarket matrix array real general\n2 2\n1\n3\n2\n4\n")
    np.testing.assert_array_equal(parse_matrix(p), [[1, 2], [3, 4]])


def test_malformed_line_number(tmp_path):
    with pytest.raises(MatrixFormatError, match="line 2"):
        parse_matrix(write(tmp_path, "a.csv", "1,2\n3,x\n"))
    with pytest.raises(MatrixFormatError, match="line 3"):
        parse_matrix(write(tmp_path, "a.csv", "1,2\n3,4\n5\n"))


def test_out_of_bounds(tmp_path):
    with pytest.raises(MatrixFormatError, match="outside"):
        parse_matrix(write(tmp_path, "a.tsv", "# n=2 m=2\n3\t1\t1\n"))
    mm = "%%MatrixMarket matrix coordinate real general\n2 2 1\n1 5 1.0\n"
    with pytest.raises(MatrixFormatError, match="line 3"):
        parse_matrix(write(tmp_path, "a.mtx", mm))


def test_duplicate_edge_last_wins(tmp_path):
    p = write(tmp_path, "a.tsv", "# n=2 m=2\n1\t1\t1\n1\t1\t7\n")
    with pytest.warns(UserWarning, match="duplicate"):
        A = parse_matrix(p)
    assert A[0, 0] == 7


def test_labels_roundtrip(tmp_path):
    p = str(tmp_path / "l.txt")
    write_labels(np.array([0, 2, 1]), p)
    assert open(p).read() == "1\n3\n2\n"
    assert read_labels(p).tolist() == [0, 2, 1]


@settings(max_examples=40, deadline=None)
@given(
    st.tuples(st.integers(1, 6), st.integers(1, 6)).flatmap(
        lambda s: arrays(np.float64, s, elements=st.floats(-1e300, 1e300, allow_nan=False, allow_infinity=False))
    ),
    st.sampled_from(["a.mtx", "a.csv", "a.tsv"]),
)
def test_roundtrip_bit_exact(tmp_path_factory, A, name):
    p = str(tmp_path_factory.mktemp("rt") / name)
    write_matrix(A, p)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        B = parse_matrix(p)
    assert B.shape == A.shape
    assert np.array_equal(B.view(np.uint64), (A + 0.0).view(np.uint64))
