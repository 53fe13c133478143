import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from dropmor.io import MatrixFileError, read_matrix, write_matrix


def test_identity_roundtrip(tmp_path):
    for M in (np.eye(2), sp.identity(2, format="csr")):
        write_matrix(tmp_path / "i.mtx", M)
        back = read_matrix(tmp_path / "i.mtx")
        assert type(back) is (np.ndarray if isinstance(M, np.ndarray) else sp.csr_matrix)
        dense = back.toarray() if sp.issparse(back) else back
        assert np.array_equal(dense, np.eye(2))


def test_out_of_bounds_entry(tmp_path):
    p = tmp_path / "bad.mtx"
    p.write_text("%%MatrixMarket matrix coordinate real general\n% note\n2 2 2\n1 1 1.0\n3 1 2.0\n")
    with pytest.raises(MatrixFileError) as info:
        read_matrix(p)
    assert info.value.line == 5 and "outside" in str(info.value)


def test_complex_entry(tmp_path):
    p = tmp_path / "c.mtx"
    p.write_text("%%MatrixMarket matrix array complex general\n1 1\n1.5 -2.25\n")
    assert read_matrix(p)[0, 0] == 1.5 - 2.25j


@pytest.mark.parametrize("text, line", [
    ("not a header\n", 1),
    ("%%MatrixMarket matrix coordinate real general\n2 2\n", 2),
    ("%%MatrixMarket matrix coordinate real general\n2 2 1\n1 x 3\n", 3),
    ("%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 3\n", 3),
    ("%%MatrixMarket matrix array real general\n2 1\n1.0\n2.0 3.0\n", 4),
    ("%%MatrixMarket matrix coordinate weird general\n1 1 0\n", 1),
])
def test_malformed_files(tmp_path, text, line):
    p = tmp_path / "m.mtx"
    p.write_text(text)
    with pytest.raises(MatrixFileError) as info:
        read_matrix(p)
    assert info.value.line == line


def test_symmetric_and_pattern(tmp_path):
    p = tmp_path / "s.mtx"
    p.write_text("%%MatrixMarket matrix coordinate real symmetric\n3 3 2\n1 1 2.0\n3 1 -1.0\n")
    np.testing.assert_array_equal(read_matrix(p).toarray(), [[2, 0, -1], [0, 0, 0], [-1, 0, 0]])
    p.write_text("%%MatrixMarket matrix coordinate pattern general\n2 2 1\n2 1\n")
    np.testing.assert_array_equal(read_matrix(p).toarray(), [[0, 0], [1, 0]])
    p.write_text("%%MatrixMarket matrix coordinate complex hermitian\n2 2 1\n2 1 1.0 2.0\n")
    np.testing.assert_array_equal(read_matrix(p).toarray(), [[0, 1 - 2j], [1 + 2j, 0]])


def test_missing_file(tmp_path):
    with pytest.raises(MatrixFileError, match="cannot read"):
        read_matrix(tmp_path / "none.mtx")


# ---------------------------------------------------------------- properties

finite = st.floats(allow_nan=False, allow_infinity=False)
shapes = st.tuples(st.integers(1, 6), st.integers(1, 6))


@given(arrays(np.float64, shapes, elements=finite))
def test_dense_real_roundtrip(tmp_path_factory, M):
    p = tmp_path_factory.mktemp("m") / "a.mtx"
    write_matrix(p, M)
    back = read_matrix(p)
    assert back.shape == M.shape and np.array_equal(back, M)


@given(arrays(np.complex128, shapes, elements=st.complex_numbers(allow_nan=False,
                                                                 allow_infinity=False)))
def test_dense_complex_roundtrip(tmp_path_factory, M):
    p = tmp_path_factory.mktemp("m") / "a.mtx"
    write_matrix(p, M)
    assert np.array_equal(read_matrix(p), M)


@given(arrays(np.float64, shapes, elements=finite), st.integers(0, 2**32 - 1))
def test_sparse_roundtrip(tmp_path_factory, M, seed):
    mask = np.random.default_rng(seed).random(M.shape) < 0.4
    S = sp.csr_matrix(np.where(mask, M, 0.0))
    p = tmp_path_factory.mktemp("m") / "s.mtx"
    write_matrix(p, S)
    back = read_matrix(p)
    assert sp.issparse(back) and back.shape == S.shape
    assert (back != S).nnz == 0
