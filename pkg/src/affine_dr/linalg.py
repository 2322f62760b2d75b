"""Dense linear-algebra kernels and the affine subspace type.

Vectors and matrices are plain float64 numpy arrays. Rank decisions use a
relative threshold of ``RANK_TOL``; every set equality elsewhere in the
package is reduced to the subspace comparisons defined here.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import NotSymmetric, SingularMatrix, WrongSize

RANK_TOL = 1e-10
RESIDUAL_TOL = 1e-9

__all__ = [
    "AffineSubspace",
    "as_matrix",
    "as_vector",
    "least_squares_solution",
    "null_space",
    "orth_columns",
    "orthonormalize",
    "principal_cosines",
    "solve_dense",
    "subspace_distance",
    "symmetric_eigenvalues",
]


def as_vector(x, name="vector"):
    v = np.array(x, dtype=float).reshape(-1)
    if v.size == 0:
        raise WrongSize(f"{name} must have at least one entry")
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{name} has non-finite entries")
    return v


def as_matrix(a, name="matrix"):
    m = np.array(a, dtype=float)
    if m.ndim == 1:
        m = m.reshape(1, -1)
    if m.ndim != 2:
        raise WrongSize(f"{name} must be two-dimensional, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name} has non-finite entries")
    return m


def _require_square(a, name="matrix"):
    if a.shape[0] != a.shape[1]:
        raise WrongSize(f"{name} must be square, got shape {a.shape}")


def solve_dense(a, b):
    """Solve ``a @ x = b`` by LU with partial pivoting.

    Raises
    ------
    SingularMatrix
        If a pivot is smaller than ``1e-12 * ||a||_inf``.
    """
    a = as_matrix(a)
    _require_square(a)
    b = np.asarray(b, dtype=float)
    if b.shape[0] != a.shape[0]:
        raise WrongSize(f"right-hand side has {b.shape[0]} rows, matrix has {a.shape[0]}")
    scale = np.linalg.norm(a, np.inf)
    if scale == 0.0:
        raise SingularMatrix("zero matrix")
    with np.errstate(all="ignore"), warnings.catch_warnings():
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(a, check_finite=False)
    pivots = np.abs(np.diag(lu))
    if np.min(pivots) < 1e-12 * scale:
        raise SingularMatrix(f"pivot {np.min(pivots):.3e} below threshold")
    return scipy.linalg.lu_solve((lu, piv), b, check_finite=False)


def least_squares_solution(a, b, rcond=RANK_TOL):
    """Minimum-norm minimiser of ``||a x - b||``.

    Singular values below ``rcond * max(s_max, 1)`` are treated as zero.
    """
    a = as_matrix(a)
    b = np.asarray(b, dtype=float)
    if a.size == 0:
        return np.zeros(a.shape[1:] + b.shape[1:])
    u, s, vt = np.linalg.svd(a, full_matrices=False)
    rank = _numerical_rank(s, rcond)
    return vt[:rank].T @ ((u[:, :rank].T @ b) / s[:rank].reshape((-1,) + (1,) * (b.ndim - 1)))


def _numerical_rank(s, tol):
    # floor at tol so that a matrix made only of roundoff has rank zero
    if not s.size:
        return 0
    return int(np.sum(s > tol * max(s[0], 1.0)))


def orth_columns(vectors, tol=RANK_TOL):
    """Orthonormal basis (as columns) of the span of the columns of ``vectors``.

    Modified Gram-Schmidt with one reorthogonalisation pass. A column whose
    residual norm falls below ``tol * (max column norm + 1)`` is dropped.
    """
    v = np.asarray(vectors, dtype=float)
    if v.ndim == 1:
        v = v.reshape(-1, 1)
    n, k = v.shape
    if k == 0:
        return np.zeros((n, 0))
    cutoff = tol * (np.max(np.linalg.norm(v, axis=0)) + 1.0)
    basis = []
    for j in range(k):
        w = v[:, j].copy()
        for _ in range(2):
            for q in basis:
                w -= (q @ w) * q
        norm = np.linalg.norm(w)
        if norm >= cutoff:
            basis.append(w / norm)
    if not basis:
        return np.zeros((n, 0))
    return np.column_stack(basis)


def orthonormalize(vectors):
    """List-of-vectors front end to :func:`orth_columns`."""
    vectors = [np.asarray(v, dtype=float) for v in vectors]
    if not vectors:
        return []
    q = orth_columns(np.column_stack(vectors))
    return [q[:, j].copy() for j in range(q.shape[1])]


def null_space(a, tol=RANK_TOL):
    """Orthonormal basis (columns) of ker ``a`` from the SVD."""
    a = np.asarray(a, dtype=float)
    if a.ndim == 1:
        a = a.reshape(1, -1)
    m, n = a.shape
    if n == 0:
        return np.zeros((0, 0))
    if m == 0:
        return np.eye(n)
    _, s, vt = np.linalg.svd(a, full_matrices=True)
    rank = _numerical_rank(s, tol)
    return vt[rank:].T.copy()


def symmetric_eigenvalues(s):
    """Ascending eigenvalues of a symmetric matrix."""
    s = as_matrix(s)
    _require_square(s)
    scale = np.linalg.norm(s, np.inf)
    if np.linalg.norm(s - s.T, np.inf) > 1e-9 * scale:
        raise NotSymmetric("matrix is not symmetric")
    return np.linalg.eigvalsh(0.5 * (s + s.T))


def _complement_basis(q, n):
    """Orthonormal basis of the orthogonal complement of span(q) in R^n."""
    if q.shape[1] == 0:
        return np.eye(n)
    return null_space(q.T)


@dataclass(frozen=True, eq=False)
class AffineSubspace:
    """``anchor + span(basis)`` with orthonormal ``basis`` columns.

    Use :meth:`make` to build one from arbitrary spanning vectors; it stores
    the point of the set nearest the origin as the anchor.
    """

    anchor: np.ndarray
    basis: np.ndarray

    @classmethod
    def make(cls, anchor, vectors=None):
        anchor = as_vector(anchor, "anchor")
        n = anchor.size
        if vectors is None:
            q = np.zeros((n, 0))
        else:
            v = np.asarray(vectors, dtype=float)
            if v.size == 0:
                q = np.zeros((n, 0))
            else:
                if v.ndim == 1:
                    v = v.reshape(-1, 1)
                if v.shape[0] != n:
                    raise WrongSize(f"basis vectors have length {v.shape[0]}, anchor has {n}")
                q = orth_columns(v)
        anchor = anchor - q @ (q.T @ anchor)
        anchor.setflags(write=False)
        q.setflags(write=False)
        return cls(anchor, q)

    @classmethod
    def from_rows(cls, anchor, rows):
        """Build from a list of spanning vectors given as rows."""
        rows = np.asarray(rows, dtype=float)
        return cls.make(anchor, rows.T if rows.size else None)

    @classmethod
    def linear(cls, vectors, n):
        return cls.make(np.zeros(n), vectors)

    @classmethod
    def whole(cls, n):
        return cls.make(np.zeros(n), np.eye(n))

    @classmethod
    def point(cls, p):
        return cls.make(p)

    @property
    def ambient(self):
        return self.anchor.size

    @property
    def dim(self):
        return self.basis.shape[1]

    def projector(self):
        return self.basis @ self.basis.T

    def project(self, x):
        x = np.asarray(x, dtype=float)
        d = x - self.anchor
        return self.anchor + self.basis @ (self.basis.T @ d)

    def distance(self, x):
        x = np.asarray(x, dtype=float)
        return float(np.linalg.norm(x - self.project(x)))

    def contains(self, x, tol=1e-8):
        x = np.asarray(x, dtype=float)
        return self.distance(x) <= tol * (1.0 + np.linalg.norm(x))

    def parallel(self):
        """The parallel linear subspace ``S - S``."""
        return AffineSubspace(np.zeros(self.ambient), self.basis)

    def orthogonal_complement(self):
        """Orthogonal complement of the parallel space (a linear subspace)."""
        return AffineSubspace.make(np.zeros(self.ambient), _complement_basis(self.basis, self.ambient))

    def translate(self, w):
        return AffineSubspace.make(self.anchor + np.asarray(w, dtype=float), self.basis)

    def minkowski_sum(self, other):
        return AffineSubspace.make(self.anchor + other.anchor, np.hstack([self.basis, other.basis]))

    def intersect(self, other):
        """Intersection, or ``None`` when empty."""
        if other.ambient != self.ambient:
            raise WrongSize("ambient dimensions differ")
        # a1 + Q1 s = a2 + Q2 t
        lhs = np.hstack([self.basis, -other.basis])
        rhs = other.anchor - self.anchor
        if lhs.shape[1] == 0:
            gap = np.linalg.norm(rhs)
            if gap > 1e-8 * (1.0 + np.linalg.norm(self.anchor) + np.linalg.norm(other.anchor)):
                return None
            return AffineSubspace.make(self.anchor)
        st = least_squares_solution(lhs, rhs)
        gap = np.linalg.norm(lhs @ st - rhs)
        if gap > 1e-8 * (1.0 + np.linalg.norm(self.anchor) + np.linalg.norm(other.anchor)):
            return None
        k = self.dim
        point = self.anchor + self.basis @ st[:k]
        n_coef = null_space(lhs)
        return AffineSubspace.make(point, self.basis @ n_coef[:k])

    def image(self, linear, offset=None):
        """Image under ``x -> linear @ x + offset``."""
        linear = np.asarray(linear, dtype=float)
        anchor = linear @ self.anchor
        if offset is not None:
            anchor = anchor + offset
        return AffineSubspace.make(anchor, linear @ self.basis)

    def __repr__(self):
        return f"AffineSubspace(ambient={self.ambient}, dim={self.dim}, anchor={np.round(self.anchor, 6)})"


def subspace_distance(s1, s2):
    """Projector gap plus anchor cross-membership; zero iff the sets coincide.

    ``None`` stands for the empty set: two empty sets are at distance 0, an
    empty and a nonempty set at distance ``inf``.
    """
    if s1 is None or s2 is None:
        return 0.0 if s1 is None and s2 is None else float("inf")
    if s1.ambient != s2.ambient:
        raise WrongSize("ambient dimensions differ")
    gap = np.linalg.norm(s1.projector() - s2.projector(), np.inf)
    return float(max(gap, s2.distance(s1.anchor), s1.distance(s2.anchor)))


def _deflated_bases(qu, qv):
    n = qu.shape[0]
    # W = par U ∩ par V as the joint kernel of the two complementary projectors
    stacked = np.vstack([np.eye(n) - qu @ qu.T, np.eye(n) - qv @ qv.T])
    w = null_space(stacked)
    pw = w @ w.T
    du = orth_columns(qu - pw @ qu)
    dv = orth_columns(qv - pw @ qv)
    return du, dv


def principal_cosines(u, v):
    """Principal cosines between ``par u`` and ``par v`` after removing their
    intersection, ascending. Empty when either deflated space is trivial."""
    if u.ambient != v.ambient:
        raise WrongSize("ambient dimensions differ")
    du, dv = _deflated_bases(u.basis, v.basis)
    if du.shape[1] == 0 or dv.shape[1] == 0:
        return []
    s = np.linalg.svd(du.T @ dv, compute_uv=False)
    return sorted(float(min(1.0, x)) for x in s)
