"""Monotonicity and paramonotonicity tests for (block) matrices."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NotMonotone, PreconditionViolated, WrongSize
from .linalg import as_matrix, as_vector, null_space
from .structured import TridiagToeplitz, kronecker, to_dense

__all__ = [
    "BlockMonotonicity",
    "block_monotonicity_tests",
    "block_quadratic_form",
    "block_tridiag_embed",
    "eigenvalue_real_parts",
    "is_monotone",
    "is_monotone_2x2",
    "is_paramonotone_linear",
    "is_symmetric",
    "kronecker_monotone_symmetric",
    "min_symmetric_eigenvalue",
]

MONOTONE_TOL = 1e-10


def _square(m):
    m = as_matrix(m)
    if m.shape[0] != m.shape[1]:
        raise WrongSize(f"matrix must be square, got {m.shape}")
    return m


def is_symmetric(m, tol=1e-12):
    m = _square(m)
    return bool(np.max(np.abs(m - m.T), initial=0.0) <= tol * max(1.0, np.max(np.abs(m), initial=0.0)))


def min_symmetric_eigenvalue(m):
    m = _square(m)
    return float(np.linalg.eigvalsh(0.5 * (m + m.T))[0])


def is_monotone(m, tol=MONOTONE_TOL):
    """True iff ``(M + M^T)/2`` is positive semidefinite up to ``-tol``."""
    return min_symmetric_eigenvalue(m) >= -tol


def is_monotone_2x2(m, tol=1e-12):
    """Principal-minor test: ``a >= 0``, ``d >= 0`` and ``4ad >= (b + c)^2``."""
    m = as_matrix(m)
    if m.shape != (2, 2):
        raise WrongSize(f"expected a 2x2 matrix, got {m.shape}")
    (a, b), (c, d) = m
    return bool(a >= -tol and d >= -tol and 4.0 * a * d - (b + c) ** 2 >= -tol)


def eigenvalue_real_parts(m):
    """Real parts of the (possibly complex) eigenvalues, ascending."""
    m = _square(m)
    if m.shape[0] > 64:
        raise WrongSize("eigenvalue_real_parts is limited to n <= 64")
    return np.sort(np.linalg.eigvals(m).real)


def is_paramonotone_linear(m, tol=1e-9):
    """A monotone linear map is paramonotone iff ker(M + M^T) ⊆ ker M."""
    m = _square(m)
    if not is_monotone(m):
        raise NotMonotone("paramonotonicity is only defined for monotone maps")
    kernel = null_space(m + m.T)
    if kernel.shape[1] == 0:
        return True
    scale = max(1.0, np.linalg.norm(m, np.inf))
    return bool(np.max(np.linalg.norm(m @ kernel, axis=0)) <= tol * scale)


def block_tridiag_embed(m):
    """Block tridiagonal matrix with ``M`` on the diagonal and ``-Id`` beside it."""
    m = _square(m)
    n = m.shape[0]
    if n < 2:
        raise WrongSize("block embedding needs n >= 2")
    shift = to_dense(TridiagToeplitz(-1.0, 0.0, -1.0, n))
    return np.kron(np.eye(n), m) + np.kron(shift, np.eye(n))


def block_quadratic_form(m, x):
    """``<x, 𝐌x>`` evaluated through its block decomposition.

    ``<x1,(M-Id)x1> + sum_{1<k<n} <xk,(M-2Id)xk> + <xn,(M-Id)xn>
    + sum_i ||x_i - x_{i+1}||^2``.
    """
    m = _square(m)
    n = m.shape[0]
    x = as_vector(x)
    if x.size != n * n:
        raise WrongSize(f"expected a vector of length {n * n}, got {x.size}")
    if n < 2:
        raise WrongSize("block form needs n >= 2")
    blocks = x.reshape(n, n)
    ident = np.eye(n)
    total = blocks[0] @ (m - ident) @ blocks[0] + blocks[-1] @ (m - ident) @ blocks[-1]
    for k in range(1, n - 1):
        total += blocks[k] @ (m - 2.0 * ident) @ blocks[k]
    total += float(np.sum((blocks[:-1] - blocks[1:]) ** 2))
    return float(total)


@dataclass(frozen=True)
class BlockMonotonicity:
    embed_monotone: bool
    m_minus_2id_monotone: bool
    m_minus_scaled_monotone: bool
    m_monotone: bool

    def chain_holds(self):
        """The implications M-2Id ⇒ 𝐌 ⇒ M-2(1-1/n)Id ⇒ M, all monotone."""
        return ((not self.m_minus_2id_monotone or self.embed_monotone)
                and (not self.embed_monotone or self.m_minus_scaled_monotone)
                and (not self.m_minus_scaled_monotone or self.m_monotone))


def block_monotonicity_tests(m, tol=MONOTONE_TOL):
    m = _square(m)
    n = m.shape[0]
    ident = np.eye(n)
    return BlockMonotonicity(
        embed_monotone=is_monotone(block_tridiag_embed(m), tol),
        m_minus_2id_monotone=is_monotone(m - 2.0 * ident, tol),
        m_minus_scaled_monotone=is_monotone(m - 2.0 * (1.0 - 1.0 / n) * ident, tol),
        m_monotone=is_monotone(m, tol),
    )


def kronecker_monotone_symmetric(m1, m2):
    """Monotonicity of ``M1 ⊗ M2`` when both factors are monotone and one is symmetric.

    Raises
    ------
    PreconditionViolated
        ``precondition`` names the failed hypothesis: ``"m1_monotone"``,
        ``"m2_monotone"`` or ``"one_symmetric"``.
    """
    m1, m2 = _square(m1), _square(m2)
    if not is_monotone(m1):
        raise PreconditionViolated("first factor is not monotone", "m1_monotone")
    if not is_monotone(m2):
        raise PreconditionViolated("second factor is not monotone", "m2_monotone")
    if not (is_symmetric(m1) or is_symmetric(m2)):
        raise PreconditionViolated("neither factor is symmetric", "one_symmetric")
    return is_monotone(kronecker(m1, m2))
