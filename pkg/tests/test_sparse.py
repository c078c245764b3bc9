import numpy as np
import pytest

from emobench import kernels
from emobench.rng import stream
from emobench.sparse import CsrMatrix, vstack


def random_dense(rng, n, m, density=0.3):
    dense = rng.normal(size=(n, m))
    dense[rng.random((n, m)) >= density] = 0.0
    return dense


def from_dense(dense):
    rows = [{j: v for j, v in enumerate(row) if v != 0.0} for row in dense]
    return CsrMatrix.from_dicts(rows, dense.shape[1])


def test_from_dicts_drops_zeros_and_sorts():
    m = CsrMatrix.from_dicts([{3: 1.0, 1: 2.0, 2: 0.0}], 5)
    assert m.indices.tolist() == [1, 3]
    assert m.data.tolist() == [2.0, 1.0]
    assert m.nnz == 2


def test_from_dicts_validates_column_range():
    with pytest.raises(ValueError):
        CsrMatrix.from_dicts([{5: 1.0}], 5)
    with pytest.raises(ValueError):
        CsrMatrix.from_dicts([{-1: 1.0}], 5)


def test_dense_roundtrip():
    rng = stream(11, "sparse")
    for _ in range(20):
        n, m = int(rng.integers(1, 9)), int(rng.integers(1, 9))
        dense = random_dense(rng, n, m)
        mat = from_dense(dense)
        assert np.array_equal(mat.to_dense(), dense)
        for i in range(n):
            assert np.array_equal(mat.row(i).to_dense(), dense[i])


def test_take_rows():
    rng = stream(12, "sparse")
    dense = random_dense(rng, 10, 6)
    mat = from_dense(dense)
    picked = np.asarray([7, 0, 3, 3], dtype=np.int64)
    sub = mat.take_rows(picked)
    assert np.array_equal(sub.to_dense(), dense[picked])


def test_to_csc_matches_dense_and_keeps_row_order():
    rng = stream(13, "sparse")
    for _ in range(10):
        dense = random_dense(rng, int(rng.integers(1, 12)), int(rng.integers(1, 8)))
        mat = from_dense(dense)
        col_indptr, col_rows, col_vals = mat.to_csc()
        rebuilt = np.zeros_like(dense)
        for c in range(dense.shape[1]):
            s, e = int(col_indptr[c]), int(col_indptr[c + 1])
            rows = col_rows[s:e]
            assert np.all(np.diff(rows) > 0)  # ascending rows within a column
            rebuilt[rows, c] = col_vals[s:e]
        assert np.array_equal(rebuilt, dense)


def test_row_norms():
    rng = stream(14, "sparse")
    dense = random_dense(rng, 15, 7)
    mat = from_dense(dense)
    assert np.allclose(mat.row_norms(), np.linalg.norm(dense, axis=1), atol=1e-12)


def test_vstack():
    rng = stream(15, "sparse")
    a = random_dense(rng, 3, 5)
    b = random_dense(rng, 4, 5)
    stacked = vstack([from_dense(a), from_dense(b)])
    assert np.array_equal(stacked.to_dense(), np.vstack([a, b]))


def test_csr_matmat_matches_dense_product():
    rng = stream(16, "sparse")
    for backend in kernels.available_backends():
        mod = kernels.get_backend(backend)
        for _ in range(10):
            n, m, p = (int(rng.integers(1, 10)) for _ in range(3))
            dense_a = random_dense(rng, n, m)
            dense_b = rng.normal(size=(m, p))
            mat = from_dense(dense_a)
            out = np.empty((n, p))
            mod.csr_matmat(mat.indptr, mat.indices, mat.data, dense_b, out)
            assert np.allclose(out, dense_a @ dense_b, atol=1e-12)


def test_csr_matmat_empty_rows_zeroed():
    mat = CsrMatrix.from_dicts([{}, {1: 2.0}, {}], 3)
    dense = np.ones((3, 2))
    out = np.full((3, 2), 99.0)
    for backend in kernels.available_backends():
        kernels.get_backend(backend).csr_matmat(mat.indptr, mat.indices, mat.data, dense, out.copy())
        got = np.full((3, 2), 99.0)
        kernels.get_backend(backend).csr_matmat(mat.indptr, mat.indices, mat.data, dense, got)
        assert np.array_equal(got, np.asarray([[0.0, 0.0], [2.0, 2.0], [0.0, 0.0]]))
