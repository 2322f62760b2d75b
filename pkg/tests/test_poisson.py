import numpy as np
import pytest

from affine_dr.errors import MaxIterExceeded, WrongSize
from affine_dr.poisson import (
    PoissonProblem,
    assemble_rhs,
    build_operators,
    change_of_variable_check,
    change_of_variable_gaps,
    direct_solve,
    map_resolvent,
    original_dr_step,
    poisson_maps,
    solve_poisson_dr,
)

from oracles import ID_KRON_JM3, JM3_KRON_ID


def exact_problem(n, u, f):
    return PoissonProblem.from_functions(n, f, u)


def nodal(p, u):
    x, y = p.nodes()
    return u(x, y)


QUADRATIC = (lambda x, y: x ** 2 + y ** 2, lambda x, y: 4.0 + 0 * x)
SADDLE = (lambda x, y: x ** 2 - y ** 2, lambda x, y: 0 * x)
PLANE = (lambda x, y: 1 + 2 * x - 3 * y, lambda x, y: 0 * x)


class TestOperators:
    def test_kron_layout(self):
        ops = build_operators(3)
        m = np.array([[2.0, -1, 0], [-1, 2, -1], [0, -1, 2]])
        np.testing.assert_array_equal(ops.L_right, np.kron(np.eye(3), m))
        np.testing.assert_array_equal(ops.L_up, np.kron(m, np.eye(3)))

    def test_right_couples_x_neighbours(self):
        ops = build_operators(3)
        # node (i, j) = (1, 1) is index 0, its x neighbour (2, 1) is index 1
        assert ops.L_right[0, 1] == -1 and ops.L_right[0, 3] == 0
        assert ops.L_up[0, 3] == -1 and ops.L_up[0, 1] == 0

    def test_resolvents_match_frozen_displays(self):
        ops = build_operators(3)
        A, B = poisson_maps(PoissonProblem.zero(3), ops)
        assert np.max(np.abs(map_resolvent(A).L - ID_KRON_JM3)) <= 1e-14
        assert np.max(np.abs(map_resolvent(B).L - JM3_KRON_ID)) <= 1e-14

    def test_too_small(self):
        with pytest.raises(WrongSize):
            build_operators(1)


class TestProblem:
    def test_scalar_broadcast(self):
        p = PoissonProblem(3, 1.0, 0.0, 1.0, 2.0, 3.0)
        assert p.f.shape == (9,)
        np.testing.assert_array_equal(p.top, [1, 1, 1])

    def test_wrong_lengths(self):
        with pytest.raises(WrongSize):
            PoissonProblem(3, np.zeros(8), 0, 0, 0, 0)
        with pytest.raises(WrongSize):
            PoissonProblem(3, 0, np.zeros(2), 0, 0, 0)

    def test_non_finite(self):
        with pytest.raises(ValueError):
            PoissonProblem(2, [1.0, np.nan, 0, 0], 0, 0, 0, 0)

    def test_nodes_row_major(self):
        p = PoissonProblem.zero(3)
        x, y = p.nodes()
        np.testing.assert_allclose(x[:3], [0.25, 0.5, 0.75])
        np.testing.assert_allclose(y[:3], [0.25, 0.25, 0.25])
        assert p.h == 0.25

    def test_from_functions_sides(self):
        p = PoissonProblem.from_functions(2, lambda x, y: x, lambda x, y: 10 * x + y)
        t = np.array([1 / 3, 2 / 3])
        np.testing.assert_allclose(p.bottom, 10 * t)
        np.testing.assert_allclose(p.top, 10 * t + 1)
        np.testing.assert_allclose(p.left, t)
        np.testing.assert_allclose(p.right, 10 + t)


class TestRhs:
    def test_corner_collects_two_sides(self):
        p = PoissonProblem(2, 0.0, [1.0, 2.0], [3.0, 4.0], [5.0, 6.0], [7.0, 8.0])
        # nodes (1,1), (2,1), (1,2), (2,2)
        np.testing.assert_allclose(assemble_rhs(p), [-(1 + 5), -(2 + 7), -(3 + 6), -(4 + 8)])

    def test_source_scaling(self):
        p = PoissonProblem(3, 2.0, 0, 0, 0, 0)
        np.testing.assert_allclose(assemble_rhs(p), np.full(9, 2.0 / 16))


class TestDirectSolve:
    @pytest.mark.parametrize("u, f", [QUADRATIC, SADDLE, PLANE])
    @pytest.mark.parametrize("n", [2, 5, 9])
    def test_exact_on_quadratics(self, u, f, n):
        # the 5-point stencil is exact for polynomials of degree <= 3
        p = exact_problem(n, u, f)
        assert np.max(np.abs(direct_solve(p) - nodal(p, u))) <= 1e-12

    def test_zero_data(self):
        np.testing.assert_allclose(direct_solve(PoissonProblem.zero(4)), 0)


class TestOriginalScheme:
    def test_implicit_equations(self):
        rng = np.random.default_rng(0)
        p = exact_problem(4, *QUADRATIC)
        A, B = poisson_maps(p)
        step = original_dr_step(A, B, rng.standard_normal(16))
        assert step["residual_half"] <= 1e-12
        assert step["residual_next"] <= 1e-12

    def test_fixed_point_is_solution(self):
        p = exact_problem(4, *SADDLE)
        A, B = poisson_maps(p)
        y = direct_solve(p)
        np.testing.assert_allclose(original_dr_step(A, B, y)["y_next"], y, atol=1e-12)

    def test_change_of_variable(self):
        rng = np.random.default_rng(1)
        for n in (2, 4, 6):
            p = PoissonProblem(n, rng.standard_normal(n * n), *rng.standard_normal((4, n)))
            A, B = poisson_maps(p)
            y0 = rng.standard_normal(n * n)
            gaps, identity_gap = change_of_variable_gaps(A, B, y0, 30)
            assert max(gaps) <= 1e-12
            assert identity_gap <= 1e-12
            assert change_of_variable_check(A, B, y0, 30)

    def test_change_of_variable_needs_steps(self):
        A, B = poisson_maps(PoissonProblem.zero(2))
        with pytest.raises(ValueError):
            change_of_variable_check(A, B, np.zeros(4), 0)


class TestSolveDr:
    @pytest.mark.parametrize("u, f", [QUADRATIC, SADDLE])
    def test_matches_exact(self, u, f):
        p = exact_problem(8, u, f)
        sol = solve_poisson_dr(p, tol=1e-12)
        assert sol.trace.converged
        assert np.max(np.abs(sol.solution - nodal(p, u))) <= 1e-9
        assert sol.direct_gap <= 1e-9

    def test_residual_reported(self):
        p = exact_problem(6, *PLANE)
        sol = solve_poisson_dr(p, tol=1e-10, compare_direct=False)
        assert sol.direct is None and sol.direct_gap is None
        assert sol.residual <= 1e-10 * (1 + np.linalg.norm(assemble_rhs(p)))

    def test_max_iter(self):
        p = exact_problem(8, *QUADRATIC)
        with pytest.raises(MaxIterExceeded) as info:
            solve_poisson_dr(p, max_iter=3)
        assert info.value.best is not None
        assert info.value.trace.iterations == 3

    def test_start_point(self):
        p = exact_problem(5, *SADDLE)
        x0 = np.linspace(-1, 1, 25)
        sol = solve_poisson_dr(p, tol=1e-12, x0=x0)
        assert sol.direct_gap <= 1e-9
