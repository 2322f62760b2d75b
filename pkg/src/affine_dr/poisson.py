"""Dirichlet-Poisson problem on the unit square and the two-half-step scheme.

Grid conventions
----------------
Interior nodes ``(x_i, y_j) = (i h, j h)`` for ``i, j = 1..n`` with
``h = 1/(n+1)``. Unknowns are stored row-major in ``y``: node ``(i, j)`` sits
at index ``(j-1) n + (i-1)``, so ``i`` (the x direction) runs fastest.

With ``M = tridiag(-1, 2, -1)``, ``L_right = Id ⊗ M`` couples neighbours in
x and ``L_up = M ⊗ Id`` couples neighbours in y. For ``Δu = f`` the discrete
system is ``(L_right + L_up) y = -b`` with

    b = h^2 f - (Dirichlet values of boundary neighbours),

so ``A y = L_right y`` and ``B y = L_up y + b`` have ``A y + B y = 0``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .affine import AffineMap, douglas_rachford_map, fixed_point_set
from .engine import IterationTrace, iterate_affine
from .errors import MaxIterExceeded, WrongSize
from .linalg import as_vector, solve_dense
from .monotone import is_symmetric
from .structured import TridiagToeplitz, kronecker_resolvent, to_dense

log = logging.getLogger(__name__)

__all__ = [
    "PoissonOperators",
    "PoissonProblem",
    "PoissonSolution",
    "assemble_rhs",
    "build_operators",
    "change_of_variable_check",
    "change_of_variable_gaps",
    "direct_solve",
    "map_resolvent",
    "original_dr_step",
    "poisson_maps",
    "solve_poisson_dr",
]

SIDES = ("bottom", "top", "left", "right")


@dataclass(frozen=True)
class PoissonOperators:
    L_right: np.ndarray
    L_up: np.ndarray
    M: TridiagToeplitz


def build_operators(n):
    """``L_right = Id ⊗ M`` and ``L_up = M ⊗ Id`` for ``M = tridiag(-1, 2, -1)``."""
    if int(n) != n or n < 2:
        raise WrongSize(f"grid size must be an integer >= 2, got {n}")
    n = int(n)
    m = TridiagToeplitz(-1.0, 2.0, -1.0, n)
    dense = to_dense(m)
    ident = np.eye(n)
    right, up = np.kron(ident, dense), np.kron(dense, ident)
    for mat in (right, up):
        if not is_symmetric(mat) or np.linalg.eigvalsh(mat)[0] <= 0:
            raise ArithmeticError("block Laplacian is not symmetric positive definite")
    return PoissonOperators(right, up, m)


@dataclass(frozen=True)
class PoissonProblem:
    """Grid size, source samples and Dirichlet values on the four sides.

    ``f`` has length ``n^2`` (row-major). ``bottom``/``top`` hold the values
    at ``y = 0`` / ``y = 1`` for ``x_1..x_n``; ``left``/``right`` hold the
    values at ``x = 0`` / ``x = 1`` for ``y_1..y_n``. Corners never enter
    the 5-point stencil.
    """

    n: int
    f: np.ndarray
    bottom: np.ndarray
    top: np.ndarray
    left: np.ndarray
    right: np.ndarray

    def __post_init__(self):
        n = self.n
        if int(n) != n or n < 2:
            raise WrongSize(f"grid size must be an integer >= 2, got {n}")
        f = np.array(self.f, dtype=float).reshape(-1)
        if f.size == 1:
            f = np.full(n * n, f[0])
        if f.size != n * n:
            raise WrongSize(f"source needs {n * n} samples, got {f.size}")
        object.__setattr__(self, "f", f)
        for side in SIDES:
            g = np.array(getattr(self, side), dtype=float).reshape(-1)
            if g.size == 1:
                g = np.full(n, g[0])
            if g.size != n:
                raise WrongSize(f"{side} boundary needs {n} values, got {g.size}")
            object.__setattr__(self, side, g)
        for name in ("f",) + SIDES:
            if not np.all(np.isfinite(getattr(self, name))):
                raise ValueError(f"{name} has non-finite entries")

    @property
    def h(self):
        return 1.0 / (self.n + 1)

    def nodes(self):
        """Interior coordinates ``(x, y)`` as row-major flat arrays."""
        t = np.arange(1, self.n + 1) * self.h
        xx, yy = np.meshgrid(t, t)
        return xx.reshape(-1), yy.reshape(-1)

    @classmethod
    def zero(cls, n):
        return cls(n, np.zeros(1), 0.0, 0.0, 0.0, 0.0)

    @classmethod
    def from_functions(cls, n, f: Callable, g: Callable):
        """Sample ``f(x, y)`` at interior nodes and ``g(x, y)`` on the boundary."""
        h = 1.0 / (n + 1)
        t = np.arange(1, n + 1) * h
        xx, yy = np.meshgrid(t, t)
        fv = np.broadcast_to(np.asarray(f(xx, yy), dtype=float), xx.shape).reshape(-1)
        zero, one = np.zeros(n), np.ones(n)

        def side(x, y):
            return np.broadcast_to(np.asarray(g(x, y), dtype=float), t.shape).copy()

        return cls(n, fv, side(t, zero), side(t, one), side(zero, t), side(one, t))


def assemble_rhs(p):
    """``b`` with ``(L_right + L_up) y = -b`` solving ``Δu = f``."""
    n = p.n
    b = (p.h ** 2) * p.f.reshape(n, n).copy()
    b[0, :] -= p.bottom
    b[-1, :] -= p.top
    b[:, 0] -= p.left
    b[:, -1] -= p.right
    return b.reshape(-1)


def poisson_maps(p, ops=None):
    """``A = L_right`` and ``B = L_up + b`` as affine maps."""
    ops = build_operators(p.n) if ops is None else ops
    return AffineMap.linear(ops.L_right), AffineMap(ops.L_up, assemble_rhs(p))


def direct_solve(p, ops=None):
    ops = build_operators(p.n) if ops is None else ops
    return solve_dense(ops.L_right + ops.L_up, -assemble_rhs(p))


def map_resolvent(F, linear_resolvent=None):
    """``J_F = (Id + F)^{-1}`` for a single-valued affine ``F x = M x + c``.

    ``linear_resolvent`` may supply ``(Id + M)^{-1}`` precomputed.
    """
    n = F.dim
    inv = solve_dense(np.eye(n) + F.L, np.eye(n)) if linear_resolvent is None else linear_resolvent
    return AffineMap(inv, -inv @ F.b)


def _kron_resolvents(p, ops):
    jm_right = kronecker_resolvent(to_dense(ops.M), "right")
    jm_up = kronecker_resolvent(to_dense(ops.M), "left")
    A, B = poisson_maps(p, ops)
    return A, B, map_resolvent(A, jm_right), map_resolvent(B, jm_up)


def original_dr_step(A, B, y, ja=None, jb=None):
    """One step of the two-half-step scheme.

    ``y_half = J_B (Id - A) y`` and ``y_next = J_A (A y + y_half)``, which
    solve ``y_half + A y + B y_half - y = 0`` and
    ``y_next - y_half - A y + A y_next = 0``.

    Returns a dict with both iterates and the two implicit residuals.
    """
    ja = map_resolvent(A) if ja is None else ja
    jb = map_resolvent(B) if jb is None else jb
    y = as_vector(y)
    ay = A(y)
    y_half = jb(y - ay)
    y_next = ja(ay + y_half)
    return {
        "y_half": y_half,
        "y_next": y_next,
        "residual_half": float(np.linalg.norm(y_half + ay + B(y_half) - y)),
        "residual_next": float(np.linalg.norm(y_next - y_half - ay + A(y_next))),
    }


def change_of_variable_gaps(A, B, y0, iters, ja=None, jb=None):
    """Gaps behind :func:`change_of_variable_check`.

    Returns ``(relative_gaps, identity_gap)`` where ``relative_gaps[k]`` is
    ``||x_k - (Id + A) y_k|| / (1 + ||x_k||)`` and ``identity_gap`` is the
    larger entrywise error of ``(Id - A) J_A = R_A`` and ``A J_A = Id - J_A``.
    """
    ja = map_resolvent(A) if ja is None else ja
    jb = map_resolvent(B) if jb is None else jb
    n = A.dim
    ident = AffineMap.identity(n)
    ra = ja.scale(2.0) - ident
    identity_gap = max(((ident - A) @ ja).max_gap(ra), (A @ ja).max_gap(ident - ja))
    T, _ = douglas_rachford_map(ja, jb)
    lift = ident + A
    y = as_vector(y0)
    x = lift(y)
    gaps = [0.0]
    for _ in range(int(iters)):
        y = original_dr_step(A, B, y, ja, jb)["y_next"]
        x = T(x)
        gaps.append(float(np.linalg.norm(x - lift(y)) / (1.0 + np.linalg.norm(x))))
    return gaps, identity_gap


def change_of_variable_check(A, B, y0, iters, tol=1e-9, identity_tol=1e-12, ja=None, jb=None):
    """True iff ``x_k = (Id + A) y_k`` for ``k <= iters`` and both resolvent
    identities hold."""
    if iters < 1:
        raise ValueError("iters must be at least 1")
    gaps, identity_gap = change_of_variable_gaps(A, B, y0, iters, ja, jb)
    return bool(max(gaps) <= tol and identity_gap <= identity_tol)


@dataclass
class PoissonSolution:
    solution: np.ndarray
    trace: IterationTrace
    residual: float
    direct: Optional[np.ndarray] = None

    @property
    def direct_gap(self):
        if self.direct is None:
            return None
        return float(np.max(np.abs(self.solution - self.direct)))


def solve_poisson_dr(p, tol=1e-10, max_iter=100_000, x0=None, compare_direct=True):
    """Solve ``A y + B y = 0`` by DR and return the shadow limit.

    Stops once ``||(L_right + L_up) y + b|| <= tol (1 + ||b||)`` for the
    shadow ``y = J_A x``.

    Raises
    ------
    MaxIterExceeded
        Carrying the best shadow iterate found.
    """
    ops = build_operators(p.n)
    A, B, ja, jb = _kron_resolvents(p, ops)
    T, _ = douglas_rachford_map(ja, jb)
    b = assemble_rhs(p)
    lap = ops.L_right + ops.L_up
    threshold = tol * (1.0 + np.linalg.norm(b))
    best = {"res": np.inf, "y": None}

    def stop(_x, y):
        res = float(np.linalg.norm(lap @ y + b))
        if res < best["res"]:
            best["res"], best["y"] = res, y
        return res <= threshold

    fix = fixed_point_set(T)
    x0 = np.zeros(p.n * p.n) if x0 is None else as_vector(x0)
    trace = iterate_affine(T, x0, max_iter, tol=0.0, shadow=ja, fix_limit=fix.project(x0),
                           keep_points=False, stop=stop)
    if not trace.converged:
        raise MaxIterExceeded(
            f"residual {best['res']:.3e} above {threshold:.3e} after {max_iter} iterations",
            best=best["y"], trace=trace)
    y = trace.final_shadow
    log.info("poisson n=%d: %d iterations, residual %.3e", p.n, trace.iterations, best["res"])
    direct = direct_solve(p, ops) if compare_direct else None
    return PoissonSolution(y, trace, float(np.linalg.norm(lap @ y + b)), direct)
