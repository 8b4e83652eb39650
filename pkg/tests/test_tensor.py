import itertools
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from strategies import cplx, dim_tuples, rng_for, seeds
from tensorphase import fixtures
from tensorphase.errors import RangeError, RankError, ShapeError, SingularityError
from tensorphase.tensor import (
    DenseTensor, Shape, conj_transpose, coordinate, determinant, diagonal, diagonal_entries,
    eigenvalues, einstein_product, fold, frobenius_inner, frobenius_norm, identity, inverse,
    is_diagonal, ivec, polar, qr, rank, scalar_mul, unfold, zeros,
)


def rand(rows, cols, seed):
    rng = rng_for(seed)
    m, n = math.prod(rows), math.prod(cols)
    return DenseTensor(cplx(rng, (m, n)), rows, cols)


def einsum_product(A, B):
    """Independent oracle: contract the full arrays index by index."""
    a, b = A.to_array(), B.to_array()
    M = len(A.row_dims)
    K = len(A.col_dims)
    L = len(B.col_dims)
    letters = "abcdefghijklmnopqrstuvwxyz"
    ra, ka, lb = letters[:M], letters[M:M + K], letters[M + K:M + K + L]
    return np.einsum(f"{ra}{ka},{ka}{lb}->{ra}{lb}", a, b)


class TestIvec:
    @pytest.mark.parametrize("idx,dims,expected", [
        ((1, 1), (2, 2), 1), ((2, 1), (2, 3), 2), ((1, 2), (2, 3), 3)])
    def test_examples(self, idx, dims, expected):
        assert ivec(idx, dims) == expected

    @pytest.mark.parametrize("dims", [(2,), (2, 3), (3, 1, 2), (2, 2, 2)])
    def test_bijective(self, dims):
        got = sorted(ivec(i, dims) for i in itertools.product(*[range(1, d + 1) for d in dims]))
        assert got == list(range(1, math.prod(dims) + 1))

    def test_out_of_range(self):
        with pytest.raises(RangeError):
            ivec((3, 1), (2, 2))
        with pytest.raises(RangeError):
            ivec((1,), (2, 2))


class TestUnfold:
    def test_identity_is_identity_matrix(self):
        np.testing.assert_array_equal(unfold(identity((2, 2))), np.eye(4))

    def test_diagonal_is_diagonal_matrix(self):
        v = np.array([1, 2j, -3, 4 + 1j])
        np.testing.assert_array_equal(unfold(diagonal((2, 2), v)), np.diag(v))

    def test_entry_placement(self):
        T = rand((2, 3), (3, 2), 1)
        arr = T.to_array()
        M = unfold(T)
        for i in itertools.product(range(1, 3), range(1, 4)):
            for j in itertools.product(range(1, 4), range(1, 3)):
                a = arr[tuple(x - 1 for x in i + j)]
                assert M[ivec(i, (2, 3)) - 1, ivec(j, (3, 2)) - 1] == a

    def test_round_trip_bit_exact(self):
        T = rand((2, 3), (2, 3), 2)
        U = fold(unfold(T), T.shape)
        assert np.array_equal(U.matrix, T.matrix)
        assert U.shape == T.shape

    def test_fold_examples(self):
        assert fold(np.eye(4), Shape((2, 2), (2, 2))).matrix.tolist() == identity((2, 2)).matrix.tolist()
        row = fold(np.arange(6.0).reshape(1, 6), Shape((1,), (2, 3)))
        assert row.row_dims == (1,) and row.col_dims == (2, 3)
        with pytest.raises(ShapeError):
            fold(np.eye(3), Shape((2, 2), (2, 2)))


class TestEinstein:
    def test_identity_neutral(self):
        X = rand((2, 2), (3,), 3)
        assert np.array_equal((identity((2, 2)) @ X).matrix, X.matrix)

    def test_diagonal_product(self):
        d = np.array([1, 2, 3j, 4])
        e = np.array([2, -1, 1j, 0.5])
        P = diagonal((2, 2), d) @ diagonal((2, 2), e)
        np.testing.assert_allclose(diagonal_entries(P), d * e, atol=0)

    def test_matches_index_contraction(self):
        A, B = rand((2, 2), (2, 2), 4), rand((2, 2), (2, 2), 5)
        np.testing.assert_allclose((A @ B).to_array(), einsum_product(A, B), atol=1e-12, rtol=0)

    def test_mismatch(self):
        with pytest.raises(ShapeError):
            rand((2, 2), (2, 3), 1) @ rand((2, 2), (2, 2), 1)

    @given(dims_a=dim_tuples, dims_k=dim_tuples, dims_b=dim_tuples, seed=seeds)
    def test_homomorphism(self, dims_a, dims_k, dims_b, seed):
        A, B = rand(dims_a, dims_k, seed), rand(dims_k, dims_b, seed + 1)
        AB = einstein_product(A, B)
        assert AB.row_dims == dims_a and AB.col_dims == dims_b
        assert np.max(np.abs(unfold(AB) - unfold(A) @ unfold(B))) <= 1e-12
        np.testing.assert_allclose(AB.to_array(), einsum_product(A, B), atol=1e-12, rtol=0)
        assert np.array_equal(unfold(conj_transpose(A)), unfold(A).conj().T)
        c = 2 - 0.5j
        assert np.max(np.abs(unfold(scalar_mul(c, A)) - c * unfold(A))) <= 1e-12


class TestBasicOps:
    def test_conj_transpose(self):
        A = rand((2, 2), (2, 2), 6)
        assert np.array_equal(A.H.H.matrix, A.matrix)
        Hm = (A + A.H) * 0.5
        assert np.array_equal(Hm.matrix, Hm.H.matrix)
        c = 2 + 3j
        np.testing.assert_allclose((A * c).H.matrix, (A.H * np.conj(c)).matrix, atol=1e-15)
        assert np.array_equal(scalar_mul(1j, identity((2, 2))).matrix, 1j * np.eye(4))

    def test_add_shape_mismatch(self):
        with pytest.raises(ShapeError):
            rand((2, 2), (2, 2), 1) + rand((4,), (4,), 1)

    def test_identity_and_diagonal(self):
        I = identity((2, 2))
        assert is_diagonal(I) and np.array_equal(diagonal_entries(I), np.ones(4))
        assert not is_diagonal(rand((2, 2), (2, 2), 7))
        with pytest.raises(ShapeError):
            diagonal((2, 2), [1, 2, 3])

    def test_immutable(self):
        A = rand((2,), (2,), 8)
        with pytest.raises(ValueError):
            A.matrix[0, 0] = 1.0


class TestInverse:
    def test_examples(self):
        assert np.array_equal(inverse(identity((2, 2))).matrix, np.eye(4))
        D = inverse(diagonal((2, 2), [2, 1j, -1, 4j]))
        np.testing.assert_allclose(diagonal_entries(D), [0.5, -1j, -1, -0.25j], atol=1e-15)

    @given(seed=seeds)
    def test_residual(self, seed):
        A = fixtures.random_nonsingular((2, 2), seed, cond=1e3)
        Ai = inverse(A)
        I = np.eye(4)
        assert np.linalg.norm((A @ Ai).matrix - I) <= 1e-9
        assert np.linalg.norm((Ai @ A).matrix - I) <= 1e-9
        # oracle: unfolded linear solve
        assert np.max(np.abs(Ai.matrix - np.linalg.solve(A.matrix, I))) <= 1e-10

    def test_singular(self):
        with pytest.raises(SingularityError) as info:
            inverse(diagonal((2,), [1.0, 0.0]))
        assert info.value.condition > 1e12


class TestSpectrum:
    def test_identity_and_diagonal(self):
        np.testing.assert_allclose(eigenvalues(identity((2, 2))).values, np.ones(4))
        v = np.array([3, 1j, -2, 0.5])
        got = np.sort_complex(eigenvalues(diagonal((2, 2), v)).values)
        np.testing.assert_allclose(got, np.sort_complex(v), atol=1e-14)

    def test_example1_quotient_eigenvalues(self):
        th = np.array([0.3, 0.7, -0.4, 1.1])
        A = fixtures.example1(th)
        lam = eigenvalues(inverse(A) @ A.H).values
        expected = np.exp(-2j * th)
        for e in expected:
            assert np.min(np.abs(lam - e)) <= 1e-10

    @given(seed=seeds)
    def test_eigenvectors(self, seed):
        A = rand((2, 2), (2, 2), seed)
        es = eigenvalues(A, want_vectors=True)
        nA = np.linalg.norm(A.matrix)
        for lam, X in zip(es.values, es.vectors):
            assert X.row_dims == (2, 2) and X.col_dims == ()
            assert abs(frobenius_norm(X) - 1) <= 1e-12
            assert frobenius_norm(A @ X - X * lam) <= 1e-8 * nA

    def test_similarity_invariance(self):
        for seed in range(20):
            A = rand((2, 2), (2, 2), seed)
            T = fixtures.random_nonsingular((2, 2), seed + 100, cond=10)
            B = inverse(T) @ A @ T
            la, lb = eigenvalues(A).values, eigenvalues(B).values
            for x in la:
                assert np.min(np.abs(lb - x)) <= 1e-7

    def test_non_square(self):
        with pytest.raises(ShapeError):
            eigenvalues(rand((2, 2), (4,), 1))

    def test_determinant(self):
        assert determinant(identity((2, 2))) == pytest.approx(1)
        assert determinant(diagonal((2, 2), [2, 1j, -1, 4j])) == pytest.approx(8)
        for seed in range(20):
            A, B = rand((2, 2), (2, 2), seed), rand((2, 2), (2, 2), seed + 50)
            lhs, rhs = determinant(A @ B), determinant(A) * determinant(B)
            assert abs(lhs - rhs) <= 1e-8 * abs(rhs)
            assert abs(determinant(A) - np.linalg.det(A.matrix)) <= 1e-8 * abs(np.linalg.det(A.matrix))

    def test_rank(self):
        assert rank(identity((2, 2))) == 4
        assert rank(zeros((2, 2))) == 0
        assert rank(fixtures.example2([0.3, 0.7, 0.4, 1.1])) == 4
        assert rank(fixtures.example2([0.1, 2.0, -1.0, 0.5])) == 4


class TestInnerProduct:
    def test_examples(self):
        e = coordinate((2, 2), (1, 2))
        assert frobenius_inner(e, e) == 1
        X, Y = rand((2, 3), (), 1), rand((2, 3), (), 2)
        assert frobenius_inner(X, Y) == pytest.approx(np.conj(frobenius_inner(Y, X)))
        oracle = np.sum(X.matrix * np.conj(Y.matrix))
        assert abs(frobenius_inner(X, Y) - oracle) <= 1e-14 * max(1, abs(oracle))
        assert frobenius_norm(X) == pytest.approx(math.sqrt(frobenius_inner(X, X).real))

    def test_shape_mismatch(self):
        with pytest.raises(ShapeError):
            frobenius_inner(rand((2,), (), 1), rand((3,), (), 1))


class TestFactorizations:
    def test_qr_identity(self):
        Q, R = qr(identity((2, 2)))
        np.testing.assert_allclose(Q.matrix, np.eye(4), atol=1e-14)
        np.testing.assert_allclose(R.matrix, np.eye(4), atol=1e-14)

    def test_qr_column_orthogonal_input(self):
        U = fixtures.random_column_orthogonal(((2, 2), (3,)), 3)
        Q, R = qr(U)
        np.testing.assert_allclose(Q.matrix, U.matrix, atol=1e-12)
        np.testing.assert_allclose(R.matrix, np.eye(3), atol=1e-12)

    @given(seed=seeds)
    def test_qr_random(self, seed):
        A = rand((2, 2), (2,), seed)
        Q, R = qr(A)
        assert np.linalg.norm(Q.H.matrix @ Q.matrix - np.eye(2)) <= 1e-10
        Rm = R.matrix
        assert np.all(np.tril(Rm, -1) == 0)
        d = np.diag(Rm)
        assert np.all(d.real >= 0) and np.all(np.abs(d.imag) <= 1e-14)
        assert frobenius_norm(A - Q @ R) <= 1e-10 * frobenius_norm(A)

    def test_qr_rank_deficient(self):
        with pytest.raises(RankError):
            qr(DenseTensor(np.ones((4, 2)), (2, 2), (2,)))

    def test_polar(self):
        U = fixtures.random_column_orthogonal(((2, 2), (2,)), 9)
        V, P = polar(U)
        np.testing.assert_allclose(V.matrix, U.matrix, atol=1e-12)
        np.testing.assert_allclose(P.matrix, np.eye(2), atol=1e-12)
        E = coordinate((2, 2), (2, 1))
        V, P = polar(E * 2.0)
        np.testing.assert_allclose(V.matrix, E.matrix, atol=1e-14)
        np.testing.assert_allclose(P.matrix, [[2]], atol=1e-14)
        X = rand((2, 3), (2,), 10)
        V, P = polar(X)
        assert frobenius_norm(X - V @ P) <= 1e-10 * frobenius_norm(X)
        assert np.linalg.norm(V.H.matrix @ V.matrix - np.eye(2)) <= 1e-10
        # oracle: SVD-based polar factor
        u, s, vh = np.linalg.svd(X.matrix, full_matrices=False)
        np.testing.assert_allclose(V.matrix, u @ vh, atol=1e-10)
        assert np.all(np.linalg.eigvalsh(P.matrix) > 0)


def test_random_generators_deterministic():
    a = fixtures.random_tensor(((2, 2), (2, 2)), 5)
    b = fixtures.random_tensor(((2, 2), (2, 2)), 5)
    assert np.array_equal(a.matrix, b.matrix)
    s1 = fixtures.random_sectorial((2, 2), (-0.5, 0.9), 3)
    s2 = fixtures.random_sectorial((2, 2), (-0.5, 0.9), 3)
    assert np.array_equal(s1.matrix, s2.matrix)
