import numpy as np
import pytest
from src.linalg.sparse import (
    TripletBuffer,
    AssemblyPattern,
    SparseSolver,
    SparseIndexError,
    DimensionMismatchError,
    SingularMatrixError,
    compress,
    solve,
    residual_norm,
)


def _from_dense(dense):
    n = dense.shape[0]
    buf = TripletBuffer(n)
    rows, cols = np.nonzero(dense)
    buf.add(rows, cols, dense[rows, cols])
    return compress(buf)


def test_duplicates_are_summed():
    buf = TripletBuffer(2)
    buf.add(0, 0, 1.0)
    buf.add(0, 0, 2.0)
    A = compress(buf)
    assert A.nnz == 1
    assert A.get(0, 0) == 3.0
    assert A.get(1, 1) == 0.0


def test_empty_buffer_gives_zero_matrix():
    A = compress(TripletBuffer(3))
    assert A.dimension == 3
    np.testing.assert_array_equal(A.toarray(), np.zeros((3, 3)))
    assert A.row_offsets.tolist() == [0, 0, 0, 0]


def test_random_triplets_match_dense_accumulation(rng):
    n = 50
    rows = rng.integers(0, n, size=2000)
    cols = rng.integers(0, n, size=2000)
    values = rng.normal(size=2000)
    buf = TripletBuffer(n)
    buf.add(rows, cols, values)
    A = compress(buf)

    dense = np.zeros((n, n))
    np.add.at(dense, (rows, cols), values)
    np.testing.assert_allclose(A.toarray(), dense, rtol=1e-13, atol=1e-13)
    assert np.all(np.diff(A.row_offsets) >= 0)
    for i in range(n):
        row_cols = A.col_indices[A.row_offsets[i]:A.row_offsets[i + 1]]
        assert np.all(np.diff(row_cols) > 0)


def test_index_out_of_range():
    buf = TripletBuffer(3)
    buf.add([0, 3], [1, 1], [1.0, 1.0])
    with pytest.raises(SparseIndexError):
        compress(buf)
    buf = TripletBuffer(3)
    buf.add(-1, 0, 1.0)
    with pytest.raises(IndexError):
        compress(buf)


def test_triplet_length_mismatch():
    with pytest.raises(DimensionMismatchError):
        TripletBuffer(3).add([0, 1], [0], [1.0, 2.0])


def test_pattern_reuse_matches_compress(rng):
    n = 30
    rows = rng.integers(0, n, size=400)
    cols = rng.integers(0, n, size=400)
    pattern = AssemblyPattern(rows, cols, n)
    for _ in range(3):
        values = rng.normal(size=400)
        buf = TripletBuffer(n)
        buf.add(rows, cols, values)
        expected = compress(buf)
        actual = pattern.matrix(values)
        np.testing.assert_array_equal(actual.row_offsets, expected.row_offsets)
        np.testing.assert_array_equal(actual.col_indices, expected.col_indices)
        np.testing.assert_allclose(actual.values, expected.values, rtol=1e-14)
    with pytest.raises(DimensionMismatchError):
        pattern.matrix(np.ones(3))


def test_solve_identity(rng):
    rhs = rng.normal(size=7)
    np.testing.assert_allclose(solve(_from_dense(np.eye(7)), rhs), rhs)


def test_solve_two_by_two():
    x = solve(_from_dense(np.array([[2.0, 1.0], [1.0, 3.0]])), np.array([3.0, 5.0]))
    np.testing.assert_allclose(x, [0.8, 1.4], rtol=1e-14)


def test_diagonally_dominant_residual(rng):
    n = 100
    dense = rng.normal(size=(n, n)) * (rng.random((n, n)) < 0.05)
    dense[np.diag_indices(n)] = np.abs(dense).sum(axis=1) + 1.0
    A = _from_dense(dense)
    rhs = rng.normal(size=n)
    x = solve(A, rhs)
    assert residual_norm(A, x, rhs) <= 1e-10 * (1.0 + np.max(np.abs(rhs)))


@pytest.mark.parametrize("n", [5, 50, 200])
def test_spd_matches_dense_oracle(rng, n):
    m = rng.normal(size=(n, n))
    dense = m @ m.T + n * np.eye(n)
    rhs = rng.normal(size=n)
    np.testing.assert_allclose(solve(_from_dense(dense), rhs), np.linalg.solve(dense, rhs), atol=1e-9)


def test_solve_is_deterministic(rng):
    n = 60
    dense = rng.normal(size=(n, n)) + n * np.eye(n)
    rhs = rng.normal(size=n)
    first = solve(_from_dense(dense), rhs)
    second = solve(_from_dense(dense), rhs)
    assert first.tobytes() == second.tobytes()


def test_singular_matrix():
    with pytest.raises(SingularMatrixError):
        solve(_from_dense(np.array([[1.0, 2.0], [2.0, 4.0]])), np.ones(2))


def test_dimension_mismatch_is_distinct():
    A = _from_dense(np.eye(3))
    with pytest.raises(DimensionMismatchError):
        solve(A, np.ones(4))
    with pytest.raises(DimensionMismatchError):
        residual_norm(A, np.ones(2), np.ones(3))
    assert not issubclass(DimensionMismatchError, SingularMatrixError)


def test_residual_norm_properties(rng):
    dense = rng.normal(size=(10, 10)) + 10 * np.eye(10)
    A = _from_dense(dense)
    rhs = rng.normal(size=10)
    x = solve(A, rhs)
    assert residual_norm(A, x, rhs) < 1e-12
    assert residual_norm(A, np.zeros(10), rhs) == pytest.approx(np.max(np.abs(rhs)))

    delta = rng.normal(size=10)
    small = residual_norm(A, x + 1e-3 * delta, rhs)
    large = residual_norm(A, x + 2e-3 * delta, rhs)
    assert large / small == pytest.approx(2.0, rel=1e-6)


def test_solver_counts_factorizations():
    solver = SparseSolver(permc_spec="NATURAL")
    A = _from_dense(np.diag([1.0, 2.0, 4.0]))
    solver.solve(A, np.ones(3))
    solver.solve(A, np.ones(3))
    assert solver.factorizations == 2
    assert solver.analyses == 1


def test_column_ordering_is_reused_while_structure_is_unchanged(rng):
    n = 40
    mask = (rng.random((n, n)) < 0.15) | np.eye(n, dtype=bool)
    rows, cols = np.nonzero(mask)
    pattern = AssemblyPattern(rows, cols, n)
    solver = SparseSolver(permc_spec="COLAMD")
    for _ in range(3):
        values = rng.normal(size=rows.shape[0]) + 8.0 * (rows == cols)
        A = pattern.matrix(values)
        rhs = rng.normal(size=n)
        np.testing.assert_allclose(solver.solve(A, rhs), np.linalg.solve(A.toarray(), rhs), rtol=1e-9, atol=1e-9)
    assert solver.factorizations == 3
    assert solver.analyses == 1

    # 结构改变后重新排序
    A = _from_dense(np.diag(np.arange(1.0, n + 1.0)))
    np.testing.assert_allclose(solver.solve(A, np.ones(n)), 1.0 / np.arange(1.0, n + 1.0))
    assert solver.analyses == 2
