import numpy as np
import pytest

from hetda.linalg import (EigenPairs, NumericError, ReducedRankError,
                          assemble_block_diag, centering_matrix,
                          gen_eig_smallest, sym_eig)


class TestCenteringMatrix:
    def test_n1_is_zero(self):
        np.testing.assert_array_equal(centering_matrix(1), [[0.0]])

    def test_n2(self):
        np.testing.assert_allclose(centering_matrix(2),
                                   [[0.5, -0.5], [-0.5, 0.5]])

    def test_idempotent_and_annihilates_ones(self):
        h = centering_matrix(3)
        np.testing.assert_allclose(h @ h, h, atol=1e-14)
        np.testing.assert_allclose(h @ np.ones(3), 0.0, atol=1e-14)

    @pytest.mark.parametrize("n", [1, 2, 5, 17, 50])
    def test_projector_properties(self, n):
        h = centering_matrix(n)
        assert np.abs(h @ np.ones(n)).max() <= 1e-12
        assert np.abs(h @ h - h).max() <= 1e-12
        np.testing.assert_array_equal(h, h.T)

    def test_zero_rejected(self):
        with pytest.raises(ValueError):
            centering_matrix(0)


class TestSymEig:
    def test_diagonal(self):
        pairs = sym_eig(np.diag([3.0, 1.0, 2.0]))
        np.testing.assert_allclose(pairs.values, [1.0, 2.0, 3.0], atol=1e-12)
        np.testing.assert_allclose(np.abs(pairs.vectors),
                                   np.eye(3)[:, [1, 2, 0]], atol=1e-12)

    def test_2x2_offdiagonal(self):
        pairs = sym_eig(np.array([[0.0, 1.0], [1.0, 0.0]]))
        np.testing.assert_allclose(pairs.values, [-1.0, 1.0], atol=1e-14)

    def test_residual_random(self):
        rng = np.random.default_rng(1)
        a = rng.normal(size=(20, 20))
        m = a + a.T
        pairs = sym_eig(m)
        scale = np.linalg.norm(m)
        for j in range(20):
            res = np.linalg.norm(m @ pairs.vectors[:, j]
                                 - pairs.values[j] * pairs.vectors[:, j])
            assert res <= 1e-9 * scale

    @pytest.mark.parametrize("d", [2, 7, 23, 50])
    def test_reconstruction(self, d):
        rng = np.random.default_rng(d)
        a = rng.normal(size=(d, d))
        m = a + a.T
        pairs = sym_eig(m)
        recon = pairs.vectors @ np.diag(pairs.values) @ pairs.vectors.T
        assert np.linalg.norm(recon - m) <= 1e-8 * np.linalg.norm(m)
        assert np.abs(pairs.vectors.T @ pairs.vectors - np.eye(d)).max() \
            <= 1e-10

    def test_values_ascending_and_unit_columns(self):
        rng = np.random.default_rng(9)
        a = rng.normal(size=(15, 15))
        pairs = sym_eig(a + a.T)
        assert np.all(np.diff(pairs.values) >= 0)
        np.testing.assert_allclose(np.linalg.norm(pairs.vectors, axis=0),
                                   1.0, atol=1e-12)

    def test_rejects_nonsymmetric(self):
        with pytest.raises(ValueError):
            sym_eig(np.array([[1.0, 2.0], [0.0, 1.0]]))

    def test_rejects_nan(self):
        with pytest.raises(ValueError):
            sym_eig(np.array([[np.nan, 0.0], [0.0, 1.0]]))


class TestGenEigSmallest:
    def test_identity_rhs_reduces_to_sym_eig(self):
        pairs = gen_eig_smallest(np.diag([3.0, 1.0, 2.0]), np.eye(3), m=2)
        np.testing.assert_allclose(pairs.values, [1.0, 2.0], atol=1e-12)

    def test_diagonal_rhs(self):
        pairs = gen_eig_smallest(np.eye(2), np.diag([1.0, 2.0]), m=1)
        np.testing.assert_allclose(pairs.values, [0.5], atol=1e-12)
        np.testing.assert_allclose(np.abs(pairs.vectors[:, 0]), [0.0, 1.0],
                                   atol=1e-12)

    def test_matches_dense_inverse_oracle(self):
        rng = np.random.default_rng(4)
        d, m = 30, 5
        b = rng.normal(size=(d, d))
        rhs = b @ b.T + d * np.eye(d)
        a = rng.normal(size=(d, d))
        lhs = a + a.T
        pairs = gen_eig_smallest(lhs, rhs, m=m)
        oracle = np.sort(np.real(
            np.linalg.eigvals(np.linalg.inv(rhs) @ lhs)))[:m]
        np.testing.assert_allclose(pairs.values, oracle,
                                   rtol=1e-7, atol=1e-7)

    def test_residual_bound(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            d = int(rng.integers(2, 25))
            m = int(rng.integers(1, d + 1))
            b = rng.normal(size=(d, d))
            rhs = b @ b.T + d * np.eye(d)
            a = rng.normal(size=(d, d))
            lhs = a + a.T
            pairs = gen_eig_smallest(lhs, rhs, m=m)
            for j in range(m):
                w = pairs.vectors[:, j]
                phi = pairs.values[j]
                res = np.linalg.norm(lhs @ w - phi * rhs @ w)
                bound = 1e-8 * (np.linalg.norm(lhs)
                                + abs(phi) * np.linalg.norm(rhs))
                assert res <= bound

    def test_agrees_with_sym_eig_up_to_sign(self):
        rng = np.random.default_rng(6)
        a = rng.normal(size=(12, 12))
        lhs = a + a.T
        gen = gen_eig_smallest(lhs, np.eye(12), m=4)
        std = sym_eig(lhs)
        np.testing.assert_allclose(gen.values, std.values[:4], atol=1e-9)
        for j in range(4):
            dot = abs(gen.vectors[:, j] @ std.vectors[:, j])
            assert dot == pytest.approx(1.0, abs=1e-9)

    def test_default_ridge_on_semidefinite_rhs(self):
        # rank-deficient PSD rhs with positive trace: the escalating default
        # ridge must make the factorization succeed
        rng = np.random.default_rng(7)
        x = rng.normal(size=(10, 3))
        rhs = x @ x.T  # rank 3
        a = rng.normal(size=(10, 10))
        pairs = gen_eig_smallest(a + a.T, rhs, m=2)
        assert np.all(np.isfinite(pairs.values))

    def test_indefinite_rhs_uses_reversed_pencil(self):
        lhs = np.eye(3)
        rhs = np.diag([1.0, -1.0, 0.0])
        pairs = gen_eig_smallest(lhs, rhs, m=2)
        np.testing.assert_allclose(pairs.values, [-1.0, 1.0], atol=1e-8)

    def test_reduced_rank_reports_achievable(self):
        with pytest.raises(ReducedRankError) as err:
            gen_eig_smallest(np.eye(3), np.diag([1.0, -1.0, 0.0]), m=3)
        assert err.value.achievable == 2

    def test_smallest_positive_selection(self):
        lhs = np.eye(3)
        rhs = np.diag([1.0, -1.0, 0.5])
        pairs = gen_eig_smallest(lhs, rhs, m=2, select="smallest_positive")
        np.testing.assert_allclose(pairs.values, [1.0, 2.0], atol=1e-8)

    def test_invalid_arguments(self):
        with pytest.raises(ValueError):
            gen_eig_smallest(np.eye(3), np.eye(3), m=4)
        with pytest.raises(ValueError):
            gen_eig_smallest(np.eye(3), np.eye(2), m=1)
        with pytest.raises(ValueError):
            gen_eig_smallest(np.eye(2), np.eye(2), m=1, ridge=-1.0)
        with pytest.raises(ValueError):
            gen_eig_smallest(np.eye(2), np.eye(2), m=1, select="largest")


class TestAssembleBlockDiag:
    def test_two_scalars(self):
        out = assemble_block_diag([np.array([[1.0]]), np.array([[2.0]])])
        np.testing.assert_array_equal(out, [[1.0, 0.0], [0.0, 2.0]])

    def test_single_block_identity(self):
        block = np.arange(6.0).reshape(2, 3)
        np.testing.assert_array_equal(assemble_block_diag([block]), block)

    def test_shapes_add(self):
        out = assemble_block_diag([np.ones((3, 5)), np.ones((2, 4))])
        assert out.shape == (5, 9)
        assert np.all(out[:3, 5:] == 0.0)
        assert np.all(out[3:, :5] == 0.0)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            assemble_block_diag([])
