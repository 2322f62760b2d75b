import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from affine_dr.errors import NotSymmetric, SingularMatrix, WrongSize
from affine_dr.linalg import (
    AffineSubspace,
    as_vector,
    least_squares_solution,
    null_space,
    orth_columns,
    orthonormalize,
    principal_cosines,
    solve_dense,
    subspace_distance,
    symmetric_eigenvalues,
)


def well_conditioned(rng, n):
    q1, _ = np.linalg.qr(rng.standard_normal((n, n)))
    q2, _ = np.linalg.qr(rng.standard_normal((n, n)))
    return q1 @ np.diag(rng.uniform(0.5, 2.0, n)) @ q2


class TestSolveDense:
    def test_identity(self):
        np.testing.assert_allclose(solve_dense(np.eye(3), [1, 2, 3]), [1, 2, 3])

    def test_diagonal(self):
        np.testing.assert_allclose(solve_dense([[2, 0], [0, 4]], [2, 4]), [1, 1])

    def test_recovers_constructed_solution(self):
        rng = np.random.default_rng(3)
        a = well_conditioned(rng, 8)
        x = rng.standard_normal(8)
        np.testing.assert_allclose(solve_dense(a, a @ x), x, atol=1e-12)

    def test_singular(self):
        with pytest.raises(SingularMatrix):
            solve_dense([[1, 2], [2, 4]], [1, 1])

    def test_zero_matrix(self):
        with pytest.raises(SingularMatrix):
            solve_dense(np.zeros((2, 2)), [1, 1])

    def test_shape_mismatch(self):
        with pytest.raises(WrongSize):
            solve_dense(np.eye(3), [1, 2])
        with pytest.raises(WrongSize):
            solve_dense(np.ones((2, 3)), [1, 2])

    def test_residual_on_many_systems(self):
        rng = np.random.default_rng(0)
        worst = 0.0
        for _ in range(1000):
            n = int(rng.integers(1, 65))
            a = well_conditioned(rng, n)
            b = rng.standard_normal(n)
            x = solve_dense(a, b)
            worst = max(worst, np.linalg.norm(a @ x - b) / (1 + np.linalg.norm(b)))
        assert worst <= 1e-10


class TestLeastSquares:
    def test_identity(self):
        np.testing.assert_allclose(least_squares_solution(np.eye(2), [3, 4]), [3, 4])

    def test_rank_deficient_min_norm(self):
        np.testing.assert_allclose(least_squares_solution([[1, 0], [0, 0]], [5, 7]), [5, 0])

    def test_matches_normal_equations(self):
        rng = np.random.default_rng(1)
        a = rng.standard_normal((6, 4))
        b = rng.standard_normal(6)
        expected = np.linalg.solve(a.T @ a, a.T @ b)
        np.testing.assert_allclose(least_squares_solution(a, b), expected, atol=1e-9)


class TestOrthonormalize:
    def test_basis_kept(self):
        q = orthonormalize([np.array([1.0, 0]), np.array([0.0, 1])])
        np.testing.assert_allclose(np.column_stack(q), np.eye(2))

    def test_dependent_pair_collapses(self):
        q = orthonormalize([np.array([2.0, 0]), np.array([4.0, 0])])
        assert len(q) == 1
        np.testing.assert_allclose(q[0], [1, 0])

    def test_same_plane(self):
        v = np.array([[1.0, 1, 0], [1, 0, 0]]).T
        q = orth_columns(v)
        assert q.shape == (3, 2)
        p_expected = np.diag([1.0, 1, 0])
        np.testing.assert_allclose(q @ q.T, p_expected, atol=1e-12)

    def test_empty(self):
        assert orthonormalize([]) == []
        assert orth_columns(np.zeros((3, 0))).shape == (3, 0)

    @settings(max_examples=60, deadline=None)
    @given(st.integers(1, 8), st.integers(1, 10), st.integers(0, 2**31 - 1))
    def test_orthonormal_output(self, n, k, seed):
        rng = np.random.default_rng(seed)
        v = rng.standard_normal((n, k)) @ rng.standard_normal((k, k))
        q = orth_columns(v)
        assert np.max(np.abs(q.T @ q - np.eye(q.shape[1])), initial=0.0) <= 1e-10
        assert q.shape[1] == np.linalg.matrix_rank(v)


class TestNullSpace:
    def test_identity(self):
        assert null_space(np.eye(3)).shape == (3, 0)

    def test_zero(self):
        q = null_space(np.zeros((3, 3)))
        np.testing.assert_allclose(q.T @ q, np.eye(3), atol=1e-12)

    def test_rank_one(self):
        q = null_space([[1.0, 1], [1, 1]])
        assert q.shape == (2, 1)
        np.testing.assert_allclose(np.abs(q[:, 0]), [1 / np.sqrt(2)] * 2)
        assert q[0, 0] * q[1, 0] < 0

    @settings(max_examples=60, deadline=None)
    @given(st.integers(1, 8), st.integers(1, 8), st.integers(0, 8), st.integers(0, 2**31 - 1))
    def test_kernel_vectors(self, m, n, r, seed):
        rng = np.random.default_rng(seed)
        r = min(r, m, n)
        a = rng.standard_normal((m, r)) @ rng.standard_normal((r, n))
        q = null_space(a)
        assert q.shape[1] == n - np.linalg.matrix_rank(a)
        if q.size:
            assert np.max(np.linalg.norm(a @ q, axis=0)) <= 1e-9 * (1 + np.linalg.norm(a, np.inf))


class TestSymmetricEigenvalues:
    def test_diagonal(self):
        np.testing.assert_allclose(symmetric_eigenvalues(np.diag([3.0, 1, 2])), [1, 2, 3])

    def test_swap(self):
        np.testing.assert_allclose(symmetric_eigenvalues([[0, 1], [1, 0]]), [-1, 1])

    def test_laplacian_symmetric_part(self):
        m = np.diag([2.0] * 4) - np.diag([1.0] * 3, 1) - np.diag([1.0] * 3, -1)
        k = np.arange(1, 5)
        np.testing.assert_allclose(symmetric_eigenvalues(m), np.sort(2 - 2 * np.cos(k * np.pi / 5)), atol=1e-12)

    def test_not_symmetric(self):
        with pytest.raises(NotSymmetric):
            symmetric_eigenvalues([[0, 1], [0, 0]])

    def test_recovers_spectrum(self):
        rng = np.random.default_rng(5)
        for n in (1, 4, 17):
            q, _ = np.linalg.qr(rng.standard_normal((n, n)))
            lam = np.sort(rng.standard_normal(n))
            np.testing.assert_allclose(symmetric_eigenvalues(q @ np.diag(lam) @ q.T), lam, atol=1e-9)


class TestAffineSubspace:
    def test_anchor_is_nearest_point(self):
        s = AffineSubspace.make([3.0, 5.0], [[1.0], [0.0]])
        np.testing.assert_allclose(s.anchor, [0, 5])

    def test_membership(self):
        s = AffineSubspace.make([0.0, 1.0, 0.0], [[1.0], [0.0], [0.0]])
        assert s.contains([7.0, 1.0, 0.0])
        assert not s.contains([0.0, 1.1, 0.0])

    def test_basis_length_mismatch(self):
        with pytest.raises(WrongSize):
            AffineSubspace.make([0.0, 0.0], [[1.0], [0.0], [0.0]])

    def test_non_finite(self):
        with pytest.raises(ValueError):
            as_vector([1.0, np.nan])

    def test_intersection_of_lines(self):
        u = AffineSubspace.make([0.0, 1.0], [[1.0], [0.0]])
        v = AffineSubspace.make([2.0, 0.0], [[0.0], [1.0]])
        w = u.intersect(v)
        assert w.dim == 0
        np.testing.assert_allclose(w.anchor, [2, 1])

    def test_parallel_lines_do_not_meet(self):
        u = AffineSubspace.make([0.0, 1.0], [[1.0], [0.0]])
        v = AffineSubspace.make([0.0, 2.0], [[1.0], [0.0]])
        assert u.intersect(v) is None

    def test_distance_metric(self):
        u = AffineSubspace.make([0.0, 0.0], [[1.0, 1.0], [0.0, 1.0]])
        assert subspace_distance(u, AffineSubspace.whole(2)) <= 1e-12
        assert subspace_distance(None, None) == 0.0
        assert subspace_distance(u, None) == float("inf")
        line = AffineSubspace.make([0.0, 0.0], [[1.0], [0.0]])
        assert subspace_distance(line, line.translate([0.0, 1.0])) == pytest.approx(1.0)

    def test_complement(self):
        u = AffineSubspace.make([1.0, 1.0, 1.0], [[1.0], [1.0], [0.0]])
        c = u.orthogonal_complement()
        assert c.dim == 2
        np.testing.assert_allclose(c.basis.T @ u.basis, 0, atol=1e-12)


class TestPrincipalCosines:
    def test_orthogonal_lines(self):
        u = AffineSubspace.make([0.0, 0.0], [[1.0], [0.0]])
        v = AffineSubspace.make([0.0, 0.0], [[0.0], [1.0]])
        assert principal_cosines(u, v) == pytest.approx([0.0])

    def test_identical_lines(self):
        u = AffineSubspace.make([0.0, 0.0], [[1.0], [0.0]])
        assert principal_cosines(u, u) == []

    def test_diagonal(self):
        u = AffineSubspace.make([0.0, 0.0], [[1.0], [0.0]])
        v = AffineSubspace.make([0.0, 0.0], [[1.0], [1.0]])
        assert principal_cosines(u, v) == pytest.approx([1 / np.sqrt(2)])

    def test_planes_sharing_a_line(self):
        # two planes in R^3 meeting along the z-axis at angle 0.3
        u = AffineSubspace.make(np.zeros(3), [[1.0, 0], [0, 0], [0, 1]])
        v = AffineSubspace.make(np.zeros(3), [[np.cos(0.3), 0], [np.sin(0.3), 0], [0, 1]])
        assert principal_cosines(u, v) == pytest.approx([np.cos(0.3)])
