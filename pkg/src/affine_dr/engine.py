"""Affine nonexpansive iteration and Douglas-Rachford runs.

An affine map ``T x = L x + b`` with a fixed point can be written
``T x = a + L (x - a)`` for a displacement ``a``; most routines here reduce
to that form.
"""

from __future__ import annotations

import csv
import io
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional

import numpy as np

from .affine import AffineMap, douglas_rachford_map, fixed_point_set, projector_map
from .errors import EmptySum, NoFixedPoint, NoSolution, WrongSize
from .linalg import AffineSubspace, as_vector, least_squares_solution, principal_cosines
from .relations import (
    attouch_thera,
    normal_cone_affine,
    product_relation,
    resolvent,
    sum_relations,
    zeros,
)

log = logging.getLogger(__name__)

__all__ = [
    "IterationTrace",
    "ParallelSplitting",
    "displacement_vector",
    "dr_operator",
    "estimate_linear_rate",
    "feasibility_translation_check",
    "fixed_point_set",
    "friedrichs_cos",
    "is_asymptotically_regular",
    "iterate_affine",
    "iterate_closed_form",
    "iterate_naive",
    "parallel_splitting",
    "project_onto_fix",
    "run_dr",
    "spectral_rate",
]

RATE_FLOOR = 1e-14


def displacement_vector(T):
    """Minimum-norm ``a`` with ``(Id - L) a = b``.

    Raises
    ------
    NoFixedPoint
        If ``b`` is not in the range of ``Id - L``.
    """
    m = np.eye(T.dim) - T.L
    a = least_squares_solution(m, T.b)
    if np.linalg.norm(m @ a - T.b) > 1e-9 * (1.0 + np.linalg.norm(T.b)):
        raise NoFixedPoint("b is not in ran(Id - L)")
    return a


def iterate_naive(T, x, n):
    x = as_vector(x)
    for _ in range(int(n)):
        x = T(x)
    return x


def iterate_closed_form(T, x, n):
    """``T^n x`` without stepping through every iterate.

    Uses ``a + L^n (x - a)`` when Fix T is nonempty and the partial-sum form
    ``L^n x + sum_{k<n} L^k b`` otherwise. Powers above 64 go through
    repeated squaring.
    """
    x = as_vector(x)
    n = int(n)
    if n < 0:
        raise ValueError("n must be nonnegative")
    try:
        a = displacement_vector(T)
    except NoFixedPoint:
        a = None
    if a is not None:
        d = x - a
        if n > 64:
            return a + np.linalg.matrix_power(T.L, n) @ d
        for _ in range(n):
            d = T.L @ d
        return a + d
    # augmented matrix [[L, b], [0, 1]] carries the partial sums
    dim = T.dim
    aug = np.zeros((dim + 1, dim + 1))
    aug[:dim, :dim] = T.L
    aug[:dim, dim] = T.b
    aug[dim, dim] = 1.0
    if n > 64:
        return (np.linalg.matrix_power(aug, n) @ np.append(x, 1.0))[:dim]
    total = np.zeros(dim)
    power_b = T.b.copy()
    lx = x.copy()
    for _ in range(n):
        total += power_b
        power_b = T.L @ power_b
        lx = T.L @ lx
    return lx + total


def project_onto_fix(T, form="displacement"):
    """Projector onto Fix T as an affine map.

    ``form="displacement"`` builds ``a + P_{Fix L}(x - a)``;
    ``form="split"`` builds ``P_{(Fix L)^perp} a + P_{Fix L} x``.
    """
    a = displacement_vector(T)
    fix_l = fixed_point_set(AffineMap.linear(T.L))
    p = fix_l.projector()
    if form == "displacement":
        return AffineMap(p, a - p @ a)
    if form == "split":
        return AffineMap(p, (np.eye(T.dim) - p) @ a)
    raise ValueError(f"unknown form {form!r}")


def is_asymptotically_regular(T, seed=0, max_power=10_000, threshold=1e-6):
    """Spectral test on ``L`` backed by an empirical residual check.

    The spectral part requires every eigenvalue on (or near) the unit circle
    to equal 1. The empirical part requires ``||L^m d - L^{m+1} d||`` to drop
    below ``threshold`` for five random ``d = x0 - a`` within ``max_power``
    steps; it catches defective eigenvalues at 1.
    """
    displacement_vector(T)
    eig = np.linalg.eigvals(T.L)
    on_circle = np.abs(eig) >= 1.0 - 1e-10
    if np.any(np.abs(eig[on_circle] - 1.0) > 1e-8):
        return False
    rng = np.random.default_rng(seed)
    for _ in range(5):
        d = rng.standard_normal(T.dim)
        d /= np.linalg.norm(d)
        for _ in range(max_power + 1):
            nxt = T.L @ d
            if np.linalg.norm(d - nxt) <= threshold:
                break
            d = nxt
        else:
            return False
    return True


def dr_operator(A, B):
    """``T_DR = Id - J_A + J_B R_A`` for two affine relations.

    The second form ``(Id + R_B R_A)/2`` is computed as well and the two are
    required to agree entrywise.
    """
    first, second = douglas_rachford_map(resolvent(A), resolvent(B))
    gap = first.max_gap(second)
    scale = 1.0 + max(np.max(np.abs(first.L)), np.max(np.abs(first.b), initial=0.0))
    if gap > 1e-12 * scale:
        raise ArithmeticError(f"the two DR forms differ by {gap:.3e}")
    return first


@dataclass
class IterationTrace:
    """Governing sequence ``T^k x0`` with optional shadows and limit distances."""

    points: List[np.ndarray] = field(default_factory=list)
    shadows: Optional[List[np.ndarray]] = None
    residuals: List[float] = field(default_factory=list)
    dist_to_fix: List[float] = field(default_factory=list)
    dist_shadow_to_pz: Optional[List[float]] = None
    fitted_rate: Optional[float] = None
    iterations: int = 0
    converged: bool = False

    @property
    def final(self):
        return self.points[-1] if self.points else None

    @property
    def final_shadow(self):
        return self.shadows[-1] if self.shadows else None

    def to_csv(self):
        """One row per recorded iterate: iter, residual, dist_to_fix, dist_shadow_to_PZ."""
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["iter", "residual", "dist_to_fix", "dist_shadow_to_PZ"])
        for k, r in enumerate(self.residuals):
            dfix = self.dist_to_fix[k] if k < len(self.dist_to_fix) else ""
            dpz = ""
            if self.dist_shadow_to_pz is not None and k < len(self.dist_shadow_to_pz):
                dpz = _fmt(self.dist_shadow_to_pz[k])
            writer.writerow([k, _fmt(r), _fmt(dfix) if dfix != "" else "", dpz])
        return buf.getvalue()


def _fmt(v):
    return f"{float(v):.17g}"


def iterate_affine(T, x0, max_iter=1000, tol=1e-10, shadow: Optional[Callable] = None,
                   fix_limit=None, shadow_limit=None, keep_points=True, stop=None):
    """Iterate ``x <- T x`` and record a trace.

    Stops once ``||x - T x|| <= tol (1 + ||x||)`` or, if given, once
    ``stop(x, shadow_x)`` is true. Distances to ``fix_limit`` and
    ``shadow_limit`` are recorded when those points are supplied.
    """
    x = as_vector(x0)
    trace = IterationTrace(shadows=[] if shadow is not None else None,
                           dist_shadow_to_pz=[] if shadow_limit is not None else None)

    def record(point):
        if keep_points or not trace.points:
            trace.points.append(point)
        else:
            trace.points[-1] = point
        s = None
        if shadow is not None:
            s = shadow(point)
            if keep_points or not trace.shadows:
                trace.shadows.append(s)
            else:
                trace.shadows[-1] = s
        if fix_limit is not None:
            trace.dist_to_fix.append(float(np.linalg.norm(point - fix_limit)))
        if shadow_limit is not None:
            trace.dist_shadow_to_pz.append(float(np.linalg.norm(s - shadow_limit)))
        return s

    s = record(x)
    for k in range(int(max_iter)):
        y = T(x)
        r = float(np.linalg.norm(x - y))
        trace.residuals.append(r)
        if r <= tol * (1.0 + np.linalg.norm(x)) or (stop is not None and stop(x, s)):
            trace.converged = True
            break
        x = y
        trace.iterations = k + 1
        s = record(x)
    if not trace.converged and trace.residuals:
        # the last recorded iterate has not been tested yet
        r = float(np.linalg.norm(x - T(x)))
        trace.residuals.append(r)
        trace.converged = r <= tol * (1.0 + np.linalg.norm(x)) or (stop is not None and stop(x, s))
    trace.fitted_rate = estimate_linear_rate(trace)
    return trace


def run_dr(A, B, x0, max_iter=10_000, tol=1e-10, keep_points=True):
    """Douglas-Rachford iteration for ``0 ∈ A x + B x``.

    The governing sequence is ``T_DR^k x0``, the shadow sequence
    ``J_A T_DR^k x0``. Distances are measured to ``P_{Fix T} x0`` and to
    ``P_Z x0``.

    Raises
    ------
    NoSolution
        If Fix T_DR (equivalently Z) is empty.
    """
    T = dr_operator(A, B)
    fix = fixed_point_set(T)
    if fix is None:
        raise NoSolution("Fix T_DR is empty, so zer(A + B) is empty")
    x0 = as_vector(x0)
    pair = attouch_thera(A, B)
    ja = resolvent(A)
    trace = iterate_affine(T, x0, max_iter, tol, shadow=ja, fix_limit=fix.project(x0),
                           shadow_limit=pair.Z.project(x0) if pair.Z is not None else None,
                           keep_points=keep_points)
    log.info("run_dr: %d iterations, converged=%s", trace.iterations, trace.converged)
    return trace


def estimate_linear_rate(trace, min_points=10):
    """Fitted ``mu`` from ``log dist_to_fix`` over the final two-thirds of the run.

    Returns ``None`` when fewer than ``min_points`` distances lie above the
    floor, or when the fitted decay is not below 1.
    """
    d = np.asarray(trace.dist_to_fix, dtype=float)
    if d.size == 0:
        return None
    above = np.nonzero(d <= RATE_FLOOR)[0]
    usable = d[: above[0]] if above.size else d
    if usable.size < min_points:
        return None
    start = usable.size // 3
    ks = np.arange(start, usable.size)
    slope = np.polyfit(ks, np.log(usable[start:]), 1)[0]
    mu = math.exp(slope)
    if not mu < 1.0:
        return None
    return mu


def spectral_rate(T):
    """Largest eigenvalue modulus of ``L`` restricted to ``(Fix L)^perp``.

    Zero when that complement is trivial.
    """
    displacement_vector(T)
    fix_l = fixed_point_set(AffineMap.linear(T.L))
    p = fix_l.projector()
    restricted = T.L @ (np.eye(T.dim) - p)
    if fix_l.dim == T.dim:
        return 0.0
    return float(np.max(np.abs(np.linalg.eigvals(restricted))))


def _feasibility_map(u, v):
    pu, pv = projector_map(u), projector_map(v)
    first, _ = douglas_rachford_map(pu, pv)
    return first


def feasibility_translation_check(U, V, w, x, n):
    """Compare ``T_{w+U,w+V}^n x`` with ``T_{U,V}^n (x - w) + w``."""
    w, x = as_vector(w), as_vector(x)
    shifted = _feasibility_map(U.translate(w), V.translate(w))
    plain = _feasibility_map(U, V)
    lhs = iterate_naive(shifted, x, n)
    rhs = iterate_naive(plain, x - w, n) + w
    return bool(np.linalg.norm(lhs - rhs) <= 1e-9 * (1.0 + np.linalg.norm(x) + np.linalg.norm(w)))


def friedrichs_cos(U, V):
    """Cosine of the Friedrichs angle between ``par U`` and ``par V``."""
    cos = principal_cosines(U, V)
    return max(cos) if cos else 0.0


@dataclass
class ParallelSplitting:
    trace: IterationTrace
    average_limit: np.ndarray
    Z_bold: AffineSubspace
    zeros_of_sum: AffineSubspace


def _diagonal(n, m):
    return AffineSubspace.make(np.zeros(n * m), np.tile(np.eye(n), (m, 1)))


def parallel_splitting(Bs, x0, max_iter=10_000, tol=1e-12):
    """Solve ``0 ∈ sum_i B_i x`` by DR on the product space.

    ``A = N_Delta`` for the diagonal ``Delta`` of ``(R^n)^m`` and ``B`` is
    the product of the ``B_i``; vectors are block-major of length ``m n``.
    The average of the blocks of the final shadow is returned.
    """
    m = len(Bs)
    if m < 2:
        raise WrongSize("parallel splitting needs at least two relations")
    n = Bs[0].dim
    x0 = as_vector(x0)
    if x0.size != m * n:
        raise WrongSize(f"starting point must have length {m * n}, got {x0.size}")
    total = Bs[0]
    try:
        for b in Bs[1:]:
            total = sum_relations(total, b)
    except EmptySum as exc:
        raise NoSolution("the domains of the B_i do not meet") from exc
    zer = zeros(total)
    if zer is None:
        raise NoSolution("zer(sum B_i) is empty")
    big_a = normal_cone_affine(_diagonal(n, m))
    big_b = product_relation(Bs)
    trace = run_dr(big_a, big_b, x0, max_iter, tol, keep_points=False)
    z_bold = attouch_thera(big_a, big_b).Z
    average = trace.final_shadow.reshape(m, n).mean(axis=0)
    return ParallelSplitting(trace, average, z_bold, zer)
