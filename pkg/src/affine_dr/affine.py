"""Affine maps ``x -> L x + b`` and their fixed-point sets."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import WrongSize
from .linalg import AffineSubspace, as_matrix, as_vector, least_squares_solution, null_space

__all__ = ["AffineMap", "douglas_rachford_map", "fixed_point_set", "projector_map"]


@dataclass(frozen=True, eq=False)
class AffineMap:
    L: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        L = as_matrix(self.L, "linear part")
        b = np.zeros(L.shape[0]) if self.b is None else np.array(self.b, dtype=float).reshape(-1)
        if L.shape[0] != L.shape[1] or b.size != L.shape[0]:
            raise WrongSize(f"linear part {L.shape} and offset {b.shape} are incompatible")
        L.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "L", L)
        object.__setattr__(self, "b", b)

    @classmethod
    def linear(cls, L):
        return cls(L, None)

    @classmethod
    def identity(cls, n):
        return cls(np.eye(n), None)

    @classmethod
    def constant(cls, c):
        c = as_vector(c)
        return cls(np.zeros((c.size, c.size)), c)

    @property
    def dim(self):
        return self.b.size

    def __call__(self, x):
        return self.L @ np.asarray(x, dtype=float) + self.b

    def compose(self, inner):
        """``self ∘ inner``."""
        return AffineMap(self.L @ inner.L, self.L @ inner.b + self.b)

    def __matmul__(self, inner):
        return self.compose(inner)

    def __add__(self, other):
        return AffineMap(self.L + other.L, self.b + other.b)

    def __sub__(self, other):
        return AffineMap(self.L - other.L, self.b - other.b)

    def scale(self, c):
        return AffineMap(c * self.L, c * self.b)

    def max_gap(self, other):
        """Largest entrywise difference of linear parts and offsets."""
        return float(max(np.max(np.abs(self.L - other.L), initial=0.0),
                         np.max(np.abs(self.b - other.b), initial=0.0)))

    def operator_norm(self):
        return float(np.linalg.norm(self.L, 2))

    def __repr__(self):
        return f"AffineMap(L={np.round(self.L, 6).tolist()}, b={np.round(self.b, 6).tolist()})"


def projector_map(subspace):
    """Orthogonal projector onto an affine subspace as an affine map."""
    p = subspace.projector()
    return AffineMap(p, subspace.anchor - p @ subspace.anchor)


def fixed_point_set(T, tol=1e-8):
    """Fix T as ``a + ker(Id - L)``, or ``None`` when ``b`` is not in ran(Id - L)."""
    n = T.dim
    m = np.eye(n) - T.L
    a = least_squares_solution(m, T.b)
    if np.linalg.norm(m @ a - T.b) > tol * (1.0 + np.linalg.norm(T.b)):
        return None
    return AffineSubspace.make(a, null_space(m))


def douglas_rachford_map(ja, jb):
    """``Id - J_A + J_B R_A`` and ``(Id + R_B R_A) / 2`` from two resolvents."""
    n = ja.dim
    ident = AffineMap.identity(n)
    ra = ja.scale(2.0) - ident
    rb = jb.scale(2.0) - ident
    first = ident - ja + jb @ ra
    second = (ident + rb @ ra).scale(0.5)
    return first, second
