"""Affine set-valued relations represented by their graphs.

A relation ``A`` on R^n is stored as the affine subspace ``gra A`` of
R^{2n}; the first n coordinates hold the point ``x``, the last n the value
``u``. Sums, inverses, parallel sums, zeros and resolvents all reduce to
constrained subspace computations on that graph.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .affine import AffineMap, douglas_rachford_map, fixed_point_set, projector_map
from .errors import EmptySum, NoSolution, NotMaximal, NotMonotone, SingularMatrix, WrongSize
from .linalg import (
    AffineSubspace,
    as_matrix,
    as_vector,
    least_squares_solution,
    null_space,
    solve_dense,
    subspace_distance,
)

__all__ = [
    "AffineRelation",
    "DualPair",
    "FixDecomposition",
    "ShadowPrediction",
    "attouch_thera",
    "constant_relation",
    "domain",
    "dr_map",
    "evaluate",
    "fix_decomposition_check",
    "from_linear_map",
    "inverse",
    "is_monotone_relation",
    "is_paramonotone_relation",
    "normal_cone_affine",
    "parallel_sum",
    "product_relation",
    "reflected_resolvent",
    "resolvent",
    "reversal",
    "shadow_limit_predicate",
    "sum_relations",
    "zero_relation",
    "zeros",
]

FEASIBILITY_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class AffineRelation:
    graph: AffineSubspace

    def __post_init__(self):
        if self.graph.ambient % 2:
            raise WrongSize("graph must live in an even-dimensional space")

    @property
    def dim(self):
        return self.graph.ambient // 2

    @property
    def anchor_x(self):
        return self.graph.anchor[: self.dim]

    @property
    def anchor_u(self):
        return self.graph.anchor[self.dim:]

    @property
    def basis_x(self):
        return self.graph.basis[: self.dim]

    @property
    def basis_u(self):
        return self.graph.basis[self.dim:]

    def contains(self, x, u, tol=1e-8):
        return self.graph.contains(np.concatenate([x, u]), tol)

    def __add__(self, other):
        return sum_relations(self, other)

    def __repr__(self):
        return f"AffineRelation(n={self.dim}, graph_dim={self.graph.dim})"


def graph_distance(a, b):
    return subspace_distance(a.graph, b.graph)


def from_linear_map(m, b=None):
    """Graph ``{(x, Mx + b)}`` of a single-valued affine map."""
    m = as_matrix(m)
    n = m.shape[0]
    if m.shape != (n, n):
        raise WrongSize(f"linear part must be square, got {m.shape}")
    b = np.zeros(n) if b is None else as_vector(b)
    if b.size != n:
        raise WrongSize("offset length does not match the matrix")
    return AffineRelation(AffineSubspace.make(np.concatenate([np.zeros(n), b]), np.vstack([np.eye(n), m])))


def zero_relation(n):
    return from_linear_map(np.zeros((n, n)))


def constant_relation(u):
    u = as_vector(u)
    return from_linear_map(np.zeros((u.size, u.size)), u)


def normal_cone_affine(subspace):
    """Normal cone of an affine subspace: ``{(x, u) : x ∈ U, u ⊥ par U}``."""
    n = subspace.ambient
    perp = subspace.orthogonal_complement().basis
    basis = np.block([
        [subspace.basis, np.zeros((n, perp.shape[1]))],
        [np.zeros((n, subspace.dim)), perp],
    ])
    return AffineRelation(AffineSubspace.make(np.concatenate([subspace.anchor, np.zeros(n)]), basis))


def _swap(n):
    ident = np.eye(n)
    zero = np.zeros((n, n))
    return np.block([[zero, ident], [ident, zero]])


def inverse(a):
    """Graph ``{(u, x) : (x, u) ∈ gra A}``."""
    return AffineRelation(a.graph.image(_swap(a.dim)))


def reversal(a):
    """``(-Id) ∘ A ∘ (-Id)``, i.e. graph ``{(-x, -u)}``."""
    return AffineRelation(AffineSubspace.make(-a.graph.anchor, a.graph.basis))


def _restrict(graph, constraint, rhs):
    """Points ``p`` of ``graph`` with ``constraint @ p = rhs``, or ``None``."""
    lhs = constraint @ graph.basis
    target = rhs - constraint @ graph.anchor
    scale = 1.0 + np.linalg.norm(rhs) + np.linalg.norm(constraint @ graph.anchor)
    if lhs.shape[1] == 0:
        if np.linalg.norm(target) > FEASIBILITY_TOL * scale:
            return None
        return AffineSubspace.make(graph.anchor)
    s0 = least_squares_solution(lhs, target)
    if np.linalg.norm(lhs @ s0 - target) > FEASIBILITY_TOL * scale:
        return None
    return AffineSubspace.make(graph.anchor + graph.basis @ s0, graph.basis @ null_space(lhs))


def _product_graph(relations):
    """Graph of ``(x_1, u_1, ..., x_m, u_m)`` with each ``(x_i, u_i) ∈ gra A_i``."""
    anchor = np.concatenate([r.graph.anchor for r in relations])
    total = sum(r.graph.ambient for r in relations)
    cols = sum(r.graph.dim for r in relations)
    basis = np.zeros((total, cols))
    row = col = 0
    for r in relations:
        q = r.graph.basis
        basis[row:row + q.shape[0], col:col + q.shape[1]] = q
        row += q.shape[0]
        col += q.shape[1]
    return AffineSubspace(anchor, basis)


def sum_relations(a, b):
    """Pointwise sum ``{(x, u + v) : (x, u) ∈ gra A, (x, v) ∈ gra B}``.

    Raises
    ------
    EmptySum
        If dom A and dom B do not intersect.
    """
    if a.dim != b.dim:
        raise WrongSize("relations act on different spaces")
    n = a.dim
    lifted = _product_graph([a, b])  # (x, u, y, v)
    ident, zero = np.eye(n), np.zeros((n, n))
    same_point = np.hstack([ident, zero, -ident, zero])
    feasible = _restrict(lifted, same_point, np.zeros(n))
    if feasible is None:
        raise EmptySum("dom A and dom B do not intersect")
    collapse = np.block([[ident, zero, zero, zero], [zero, ident, zero, ident]])
    return AffineRelation(feasible.image(collapse))


def parallel_sum(a, b):
    """``(A^{-1} + B^{-1})^{-1}``."""
    return inverse(sum_relations(inverse(a), inverse(b)))


def product_relation(relations):
    """``A_1 × ... × A_m`` on R^{mn} with block-major vectors."""
    n = relations[0].dim
    if any(r.dim != n for r in relations):
        raise WrongSize("all factors must act on the same space")
    m = len(relations)
    graph = _product_graph(relations)
    # reorder (x_1, u_1, ..., x_m, u_m) -> (x_1..x_m, u_1..u_m)
    perm = np.concatenate([np.arange(i * 2 * n, i * 2 * n + n) for i in range(m)]
                          + [np.arange(i * 2 * n + n, (i + 1) * 2 * n) for i in range(m)])
    return AffineRelation(AffineSubspace.make(graph.anchor[perm], graph.basis[perm]))


def evaluate(a, x):
    """The value set ``A x`` as an affine subspace, or ``None`` if ``x ∉ dom A``."""
    n = a.dim
    x = as_vector(x)
    pick_x = np.hstack([np.eye(n), np.zeros((n, n))])
    points = _restrict(a.graph, pick_x, x)
    if points is None:
        return None
    return points.image(np.hstack([np.zeros((n, n)), np.eye(n)]))


def zeros(a):
    """``{x : 0 ∈ A x}``, or ``None`` when empty."""
    n = a.dim
    pick_u = np.hstack([np.zeros((n, n)), np.eye(n)])
    points = _restrict(a.graph, pick_u, np.zeros(n))
    if points is None:
        return None
    return points.image(np.hstack([np.eye(n), np.zeros((n, n))]))


def domain(a):
    n = a.dim
    return a.graph.image(np.hstack([np.eye(n), np.zeros((n, n))]))


def _monotone_form(a):
    qx, qu = a.basis_x, a.basis_u
    g = qx.T @ qu
    return 0.5 * (g + g.T)


def is_monotone_relation(a, tol=1e-10):
    """``<dx, du> >= 0`` on the parallel space of the graph."""
    form = _monotone_form(a)
    if form.size == 0:
        return True
    return bool(np.linalg.eigvalsh(form)[0] >= -tol)


def is_paramonotone_relation(a, tol=1e-8):
    """Every graph direction ``(dx, du)`` with ``<dx, du> = 0`` must have both
    ``(dx, 0)`` and ``(0, du)`` in the parallel space of the graph."""
    if not is_monotone_relation(a):
        raise NotMonotone("relation is not monotone")
    form = _monotone_form(a)
    if form.size == 0:
        return True
    w, v = np.linalg.eigh(form)
    flat = v[:, w <= 1e-9]
    if flat.shape[1] == 0:
        return True
    q = a.graph.basis
    n = a.dim
    for d in (q @ flat).T:
        for part in (np.concatenate([d[:n], np.zeros(n)]), np.concatenate([np.zeros(n), d[n:]])):
            if np.linalg.norm(part - q @ (q.T @ part)) > tol * (1.0 + np.linalg.norm(part)):
                return False
    return True


def resolvent(a):
    """``J_A = (Id + A)^{-1}`` as an affine map.

    Raises
    ------
    NotMaximal
        If ``A`` is not monotone or ``Id + A`` is not onto with unique
        preimages (the finite-dimensional stand-in for maximality).
    """
    if not is_monotone_relation(a):
        raise NotMaximal("relation is not monotone")
    n = a.dim
    qx, qu = a.basis_x, a.basis_u
    if qx.shape[1] != n:
        raise NotMaximal(f"graph has dimension {qx.shape[1]}, a maximal monotone affine relation needs {n}")
    c = qx + qu
    try:
        c_inv = solve_dense(c, np.eye(n))
    except SingularMatrix as exc:
        raise NotMaximal("Id + A is not invertible") from exc
    lin = qx @ c_inv
    shift = a.anchor_x - lin @ (a.anchor_x + a.anchor_u)
    return AffineMap(lin, shift)


def reflected_resolvent(a):
    j = resolvent(a)
    return j.scale(2.0) - AffineMap.identity(a.dim)


@dataclass(frozen=True)
class DualPair:
    """Primal and dual solution sets; ``None`` stands for the empty set."""

    Z: Optional[AffineSubspace]
    K: Optional[AffineSubspace]
    route_gap: float = 0.0


def _zeros_of_sum(a, b):
    try:
        return zeros(sum_relations(a, b))
    except EmptySum:
        return None


def attouch_thera(a, b):
    """``Z = (A + B)^{-1}(0)`` and ``K = (A^{-1} + B^{-∨})^{-1}(0)``.

    ``route_gap`` is the distance between this K and ``(A □ B^∨)(0)``.
    """
    z = _zeros_of_sum(a, b)
    k = _zeros_of_sum(inverse(a), inverse(reversal(b)))
    try:
        k_alt = evaluate(parallel_sum(a, reversal(b)), np.zeros(a.dim))
    except EmptySum:
        k_alt = None
    return DualPair(z, k, subspace_distance(k, k_alt))


def _perp_gap(k, z):
    """Largest inner product between points of K and directions of Z - Z."""
    if z.dim == 0:
        return 0.0, 0.0
    dirs = float(np.max(np.abs(k.basis.T @ z.basis), initial=0.0))
    anchor = float(np.max(np.abs(z.basis.T @ k.anchor), initial=0.0)) / (1.0 + np.linalg.norm(k.anchor))
    return dirs, anchor


@dataclass(frozen=True)
class FixDecomposition:
    fix: AffineSubspace
    z_plus_k: AffineSubspace
    distance: float
    equal: bool
    k_perp_z: bool
    kdiff_perp_zdiff: bool


def dr_map(a, b):
    """Douglas-Rachford operator ``Id - J_A + J_B R_A`` of the ordered pair."""
    first, _ = douglas_rachford_map(resolvent(a), resolvent(b))
    return first


def fix_decomposition_check(a, b, tol=1e-8):
    """Compare Fix T_DR with Z + K and test the two orthogonality relations.

    ``k_perp_z`` is ``K ⊥ (Z - Z)`` (every point of K); ``kdiff_perp_zdiff``
    is the weaker ``(K - K) ⊥ (Z - Z)``.
    """
    pair = attouch_thera(a, b)
    if pair.Z is None or pair.K is None:
        raise NoSolution("Z or K is empty")
    fix = fixed_point_set(dr_map(a, b))
    if fix is None:
        raise NoSolution("Douglas-Rachford operator has no fixed point")
    zk = pair.Z.minkowski_sum(pair.K)
    dist = subspace_distance(fix, zk)
    dirs, anchor = _perp_gap(pair.K, pair.Z)
    return FixDecomposition(
        fix=fix,
        z_plus_k=zk,
        distance=dist,
        equal=bool(dist <= tol),
        k_perp_z=bool(max(dirs, anchor) <= tol),
        kdiff_perp_zdiff=bool(dirs <= tol),
    )


@dataclass(frozen=True)
class ShadowPrediction:
    paramonotone: bool
    k_perp_zdiff: bool
    predicts_shadow_to_PZ: bool
    identity_gap: float
    identity_verified: Optional[bool]


def shadow_limit_predicate(a, b, n_points=20, seed=0, tol=1e-8):
    """Predict whether ``J_A T^n x -> P_Z x`` via ``K ⊥ (Z - Z)``.

    The prediction needs both relations paramonotone; without that it is
    reported as ``False``. ``identity_gap`` measures ``J_A P_Fix - P_Z`` on
    ``n_points`` random points and is checked when the prediction holds.
    """
    pair = attouch_thera(a, b)
    if pair.Z is None or pair.K is None:
        raise NoSolution("Z or K is empty")
    para = is_monotone_relation(a) and is_monotone_relation(b)
    para = para and is_paramonotone_relation(a) and is_paramonotone_relation(b)
    dirs, anchor = _perp_gap(pair.K, pair.Z)
    k_perp = bool(max(dirs, anchor) <= tol)
    predicts = para and k_perp

    fix = fixed_point_set(dr_map(a, b))
    lhs = resolvent(a) @ projector_map(fix)
    rhs = projector_map(pair.Z)
    rng = np.random.default_rng(seed)
    gap = 0.0
    for _ in range(n_points):
        x = rng.standard_normal(a.dim)
        gap = max(gap, float(np.linalg.norm(lhs(x) - rhs(x)) / (1.0 + np.linalg.norm(x))))
    verified = bool(gap <= tol) if predicts else None
    return ShadowPrediction(para, k_perp, predicts, gap, verified)
