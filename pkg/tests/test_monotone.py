import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from affine_dr.errors import NotMonotone, PreconditionViolated, WrongSize
from affine_dr.monotone import (
    block_monotonicity_tests,
    block_quadratic_form,
    block_tridiag_embed,
    eigenvalue_real_parts,
    is_monotone,
    is_monotone_2x2,
    is_paramonotone_linear,
    kronecker_monotone_symmetric,
)
from affine_dr.structured import TridiagToeplitz, to_dense

from oracles import ROT

SKEWED = np.array([[1.0, -1.0], [1.0, 1.0]])


class TestIsMonotone:
    def test_rotation(self):
        assert is_monotone(ROT)

    def test_shear(self):
        assert not is_monotone([[1, 3], [0, 1]])

    def test_negative_identity(self):
        assert not is_monotone(-np.eye(2))

    def test_tolerance(self):
        assert is_monotone(np.diag([1.0, -1e-12]))
        assert not is_monotone(np.diag([1.0, -1e-12]), tol=0.0)

    def test_non_square(self):
        with pytest.raises(WrongSize):
            is_monotone(np.ones((2, 3)))


class TestMonotone2x2:
    def test_skewed(self):
        assert is_monotone_2x2(SKEWED)

    def test_shear(self):
        assert not is_monotone_2x2([[1, 3], [0, 1]])

    def test_zero(self):
        assert is_monotone_2x2(np.zeros((2, 2)))

    def test_wrong_size(self):
        with pytest.raises(WrongSize):
            is_monotone_2x2(np.eye(3))

    def test_agrees_with_general_test(self):
        rng = np.random.default_rng(4)
        for _ in range(1000):
            m = rng.uniform(-2, 2, (2, 2))
            assert is_monotone_2x2(m) == is_monotone(m)


class TestEigenvalueRealParts:
    def test_rotation(self):
        np.testing.assert_allclose(eigenvalue_real_parts(ROT), [0, 0], atol=1e-15)

    def test_shear(self):
        np.testing.assert_allclose(eigenvalue_real_parts([[1, 3], [0, 1]]), [1, 1])

    def test_diagonal(self):
        np.testing.assert_allclose(eigenvalue_real_parts(np.diag([5.0, 2.0])), [2, 5])

    def test_size_cap(self):
        with pytest.raises(WrongSize):
            eigenvalue_real_parts(np.eye(65))

    def test_necessary_condition_only(self):
        rng = np.random.default_rng(6)
        for _ in range(500):
            n = int(rng.integers(1, 11))
            m = rng.standard_normal((n, n))
            if rng.random() < 0.5:
                m = m - m.T + np.diag(rng.uniform(0, 1, n))
            if is_monotone(m):
                assert np.min(eigenvalue_real_parts(m)) >= -1e-8
        # spectrum in the right half plane does not imply monotone
        assert np.min(eigenvalue_real_parts([[1, 3], [0, 1]])) > 0
        assert not is_monotone([[1, 3], [0, 1]])


class TestParamonotoneLinear:
    def test_rotation(self):
        assert not is_paramonotone_linear(ROT)

    def test_symmetric_psd(self):
        rng = np.random.default_rng(8)
        for rank in range(5):
            g = rng.standard_normal((5, rank))
            assert is_paramonotone_linear(g @ g.T)

    def test_identity(self):
        assert is_paramonotone_linear(np.eye(3))

    def test_requires_monotone(self):
        with pytest.raises(NotMonotone):
            is_paramonotone_linear(-np.eye(2))

    def test_sampled_definition(self):
        rng = np.random.default_rng(9)
        for _ in range(200):
            n = int(rng.integers(2, 6))
            g = rng.standard_normal((n, int(rng.integers(0, n))))
            s = rng.standard_normal((n, n))
            m = g @ g.T + (s - s.T) * (rng.random() < 0.5)
            if not is_monotone(m):
                continue
            verdict = is_paramonotone_linear(m)
            kernel = np.linalg.svd(m + m.T)[2][np.linalg.matrix_rank(m + m.T):].T
            if verdict:
                # pairs with <z, Mz> = 0 must have Mz = 0; such z lie in the kernel
                for _ in range(5):
                    if kernel.shape[1] == 0:
                        break
                    z = kernel @ rng.standard_normal(kernel.shape[1])
                    assert abs(z @ m @ z) <= 1e-12 * (z @ z) + 1e-12
                    assert np.linalg.norm(m @ z) <= 1e-8 * (1 + np.linalg.norm(z))
            else:
                witnesses = [q for q in kernel.T if np.linalg.norm(m @ q) > 1e-9]
                assert witnesses
                z = witnesses[0]
                assert abs(z @ m @ z) <= 1e-9


class TestBlockEmbedding:
    def test_scaled_identity_is_kronecker(self):
        expected = np.kron(to_dense(TridiagToeplitz(-1, 2, -1, 2)), np.eye(2))
        np.testing.assert_array_equal(block_tridiag_embed(2 * np.eye(2)), expected)

    def test_half_identity(self):
        e = block_tridiag_embed(0.5 * np.eye(2))
        expected = np.array([[0.5, 0, -1, 0], [0, 0.5, 0, -1], [-1, 0, 0.5, 0], [0, -1, 0, 0.5]])
        np.testing.assert_array_equal(e, expected)
        np.testing.assert_allclose(np.unique(np.round(np.linalg.eigvalsh(e), 12)), [-0.5, 1.5])

    @pytest.mark.parametrize("n", [2, 3, 5])
    def test_laplacian_structure(self, n):
        m = to_dense(TridiagToeplitz(-1, 2, -1, n))
        stencil = np.zeros((n * n, n * n))
        for i in range(n):
            for j in range(n):
                k = i * n + j
                stencil[k, k] = 4
                for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
                    if 0 <= i + di < n and 0 <= j + dj < n:
                        stencil[k, (i + di) * n + j + dj] = -1
        # M carries diagonal 2, the stencil 4: the sum Id⊗M + M⊗Id adds 2 Id
        np.testing.assert_array_equal(block_tridiag_embed(m) + 2 * np.eye(n * n), stencil)
        np.testing.assert_array_equal(block_tridiag_embed(to_dense(TridiagToeplitz(-1, 4, -1, n))), stencil)

    def test_size(self):
        with pytest.raises(WrongSize):
            block_tridiag_embed(np.eye(1))


class TestBlockQuadraticForm:
    def test_zero(self):
        assert block_quadratic_form(np.eye(3), np.zeros(9)) == 0.0

    def test_repeated_block(self):
        y = np.array([0.3, -1.2])
        assert block_quadratic_form(np.eye(2), np.concatenate([y, y])) == pytest.approx(0.0, abs=1e-15)
        m = np.array([[2.0, 1.0], [0.0, 3.0]])
        direct = 2 * y @ (m - np.eye(2)) @ y
        assert block_quadratic_form(m, np.concatenate([y, y])) == pytest.approx(direct)

    def test_wrong_length(self):
        with pytest.raises(WrongSize):
            block_quadratic_form(np.eye(3), np.zeros(8))

    @settings(max_examples=100, deadline=None)
    @given(st.integers(2, 6), st.integers(0, 2**31 - 1))
    def test_matches_direct_form(self, n, seed):
        rng = np.random.default_rng(seed)
        m = rng.standard_normal((n, n))
        x = rng.standard_normal(n * n)
        direct = x @ block_tridiag_embed(m) @ x
        tol = 1e-10 * (1 + (x @ x) * np.linalg.norm(m, np.inf))
        assert abs(block_quadratic_form(m, x) - direct) <= tol


class TestBlockMonotonicity:
    def test_large_multiple(self):
        r = block_monotonicity_tests(3 * np.eye(2))
        assert r.embed_monotone and r.m_minus_2id_monotone and r.m_minus_scaled_monotone and r.m_monotone

    def test_embed_without_shifted(self):
        r = block_monotonicity_tests(SKEWED)
        assert r.embed_monotone
        assert not r.m_minus_2id_monotone

    def test_half_identity(self):
        r = block_monotonicity_tests(0.5 * np.eye(2))
        assert r.m_monotone
        assert not r.embed_monotone
        assert not r.m_minus_scaled_monotone

    def test_chain_on_random_matrices(self):
        rng = np.random.default_rng(10)
        for _ in range(200):
            n = int(rng.integers(2, 6))
            m = rng.standard_normal((n, n)) + rng.uniform(0, 4) * np.eye(n)
            assert block_monotonicity_tests(m).chain_holds()

    def test_two_by_two_biconditional(self):
        rng = np.random.default_rng(12)
        for _ in range(200):
            m = rng.standard_normal((2, 2)) + rng.uniform(0, 3) * np.eye(2)
            assert is_monotone(m - np.eye(2)) == block_monotonicity_tests(m).embed_monotone


class TestKroneckerMonotone:
    def test_identity_and_rotation(self):
        assert kronecker_monotone_symmetric(np.eye(2), ROT)

    def test_rotation_squared_violates(self):
        with pytest.raises(PreconditionViolated) as info:
            kronecker_monotone_symmetric(ROT, ROT)
        assert info.value.precondition == "one_symmetric"
        assert not is_monotone(np.kron(ROT, ROT))

    def test_laplacian_with_skewed(self):
        m1 = to_dense(TridiagToeplitz(-1, 2, -1, 3))
        assert kronecker_monotone_symmetric(m1, SKEWED)
        k = np.kron(m1, SKEWED)
        assert np.linalg.eigvalsh(0.5 * (k + k.T))[0] >= -1e-12

    def test_precondition_names(self):
        with pytest.raises(PreconditionViolated) as info:
            kronecker_monotone_symmetric(-np.eye(2), np.eye(2))
        assert info.value.precondition == "m1_monotone"
        with pytest.raises(PreconditionViolated) as info:
            kronecker_monotone_symmetric(np.eye(2), -np.eye(2))
        assert info.value.precondition == "m2_monotone"

    @settings(max_examples=50, deadline=None)
    @given(st.integers(1, 4), st.integers(1, 4), st.integers(0, 2**31 - 1))
    def test_conclusion_holds(self, n1, n2, seed):
        rng = np.random.default_rng(seed)
        g = rng.standard_normal((n1, n1))
        s = rng.standard_normal((n2, n2))
        h = rng.standard_normal((n2, n2))
        assert kronecker_monotone_symmetric(g @ g.T, h @ h.T + s - s.T)
