"""Tridiagonal Toeplitz matrices and Kronecker-product resolvents.

``TridiagToeplitz(alpha, beta, gamma, n)`` has ``beta`` on the diagonal,
``alpha`` below it and ``gamma`` above it.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateCase, NotMonotone, NotSymmetric, SingularMatrix, WrongBranch
from .linalg import as_matrix, solve_dense

__all__ = [
    "TridiagToeplitz",
    "check_invertible",
    "eigenvalues_analytic",
    "invert_closed_form",
    "invert_recurrence",
    "invert_triangular_case",
    "is_monotone_tridiag",
    "kronecker",
    "kronecker_resolvent",
    "monotone_threshold",
    "resolvent_tridiag",
    "symmetric_part_eigenvalues",
    "to_dense",
]

# |beta^2 - 4 alpha gamma| at or below this (relative) selects the double-root formula
DOUBLE_ROOT_TOL = 1e-10


@dataclass(frozen=True)
class TridiagToeplitz:
    alpha: float
    beta: float
    gamma: float
    n: int

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"dimension must be a positive integer, got {self.n}")
        for name in ("alpha", "beta", "gamma"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")

    def shifted(self, delta):
        """Same off-diagonals, diagonal ``beta + delta``."""
        return TridiagToeplitz(self.alpha, self.beta + delta, self.gamma, self.n)


def to_dense(t):
    n = t.n
    m = np.diag(np.full(n, float(t.beta)))
    if n > 1:
        m += np.diag(np.full(n - 1, float(t.alpha)), -1)
        m += np.diag(np.full(n - 1, float(t.gamma)), 1)
    return m


def _cosines(n):
    k = np.arange(1, n + 1)
    return np.cos(k * np.pi / (n + 1))


def symmetric_part_eigenvalues(t):
    """Eigenvalues of ``(M + M^T)/2``, ascending."""
    return np.sort(t.beta + (t.alpha + t.gamma) * _cosines(t.n))


def monotone_threshold(t):
    """Smallest diagonal value for which the matrix is monotone."""
    return abs(t.alpha + t.gamma) * math.cos(math.pi / (t.n + 1))


def is_monotone_tridiag(t, tol=1e-12):
    return t.beta >= monotone_threshold(t) - tol


def _complex_eigenvalues(t):
    root = cmath.sqrt(complex(t.alpha) / complex(t.gamma))
    return [t.beta + 2.0 * t.gamma * root * c for c in _cosines(t.n)]


def eigenvalues_analytic(t):
    """Eigenvalues ``beta + 2 gamma sqrt(alpha/gamma) cos(k pi/(n+1))``.

    Returns the ascending real list when ``alpha*gamma > 0`` and ``None``
    when the eigenvalues are not real (``alpha*gamma < 0``).

    Raises
    ------
    DegenerateCase
        If ``alpha*gamma == 0``; the matrix is then triangular.
    """
    ag = t.alpha * t.gamma
    if ag == 0:
        raise DegenerateCase("alpha*gamma = 0: triangular case, eigenvalue is beta")
    if ag < 0:
        return None
    factor = math.copysign(math.sqrt(ag), t.gamma)
    return np.sort(t.beta + 2.0 * factor * _cosines(t.n))


def invert_triangular_case(t):
    """Inverse of the (lower or upper) triangular case ``alpha*gamma == 0``."""
    if t.alpha * t.gamma != 0:
        raise WrongBranch("alpha*gamma != 0: matrix is not triangular")
    if t.beta == 0:
        raise SingularMatrix("beta = 0: determinant beta^n vanishes", eigenvalue=0.0)
    n = t.n
    inv = np.empty((n, n))
    for i in range(n):
        for j in range(n):
            lower = max(i - j, 0)
            upper = max(j - i, 0)
            inv[i, j] = (-t.alpha) ** lower * (-t.gamma) ** upper * t.beta ** (-abs(i - j) - 1)
    return inv


def check_invertible(t):
    """Raise SingularMatrix when an analytic eigenvalue (``alpha*gamma != 0``) vanishes."""
    scale = abs(t.beta) + 2.0 * math.sqrt(abs(t.alpha * t.gamma)) + 1.0
    for lam in _complex_eigenvalues(t):
        if abs(lam) <= 1e-10 * scale:
            raise SingularMatrix(f"eigenvalue {lam.real:.3e}{lam.imag:+.3e}j vanishes", eigenvalue=lam)


def _require_tridiagonal(t):
    if t.alpha * t.gamma == 0:
        raise WrongBranch("alpha*gamma = 0: use the triangular formula")


def invert_closed_form(t):
    """Entrywise closed-form inverse for ``alpha*gamma != 0``.

    ``r`` and ``s`` are the roots of ``gamma z^2 + beta z + alpha``; complex
    roots are handled in complex arithmetic and the result is real.
    """
    _require_tridiagonal(t)
    check_invertible(t)
    a, b, g, n = t.alpha, t.beta, t.gamma, t.n
    disc = b * b - 4.0 * a * g
    i, j = np.indices((n, n)) + 1
    lo, hi = np.minimum(i, j), np.maximum(i, j)
    coef = (g / a) ** (j - 1) / a
    if abs(disc) <= DOUBLE_ROOT_TOL * (b * b + 4.0 * abs(a * g)):
        r = -b / (2.0 * g)
        inv = -coef * lo * (n + 1 - hi) * r ** (i + j - 1) / (n + 1)
        return inv
    root = cmath.sqrt(disc)
    r = (-b + root) / (2.0 * g)
    s = (-b - root) / (2.0 * g)
    lo_c, hi_c = lo.astype(complex), hi.astype(complex)
    num = (r ** lo_c - s ** lo_c) * (r ** (n + 1) * s ** hi_c - r ** hi_c * s ** (n + 1))
    den = (r - s) * (r ** (n + 1) - s ** (n + 1))
    inv = -coef * num / den
    residue = np.max(np.abs(inv.imag))
    if residue > 1e-9 * max(1.0, np.max(np.abs(inv.real))):
        raise ArithmeticError(f"imaginary residue {residue:.3e} in closed-form inverse")
    return inv.real.copy()


def _scaled_sequence(first, second, step, count):
    """Run a two-term linear recurrence, returning mantissas and log-scales.

    ``value_k = mant[k] * exp(logs[k])``; the pair is renormalised whenever it
    grows past 1e100 or shrinks under 1e-100 so long runs cannot overflow.
    """
    mant = np.zeros(count)
    logs = np.zeros(count)
    mant[0], mant[1] = first, second
    prev, cur, log = first, second, 0.0
    for k in range(2, count):
        nxt = step(prev, cur)
        prev, cur = cur, nxt
        big = max(abs(prev), abs(cur))
        if big > 1e100 or (0 < big < 1e-100):
            prev, cur = prev / big, cur / big
            log += math.log(big)
        mant[k], logs[k] = cur, log
    return mant, logs


def invert_recurrence(t):
    """Inverse from the forward/backward three-term recurrences.

    ``u`` runs forward from ``(u_0, u_1) = (0, 1)``, ``v`` backward from
    ``(v_{n+1}, v_n) = (0, 1)``, and
    ``inv[i, j] = -u_min v_max (gamma/alpha)^(j-1) / (alpha v_0)``.
    """
    _require_tridiagonal(t)
    a, b, g, n = t.alpha, t.beta, t.gamma, t.n
    u_m, u_l = _scaled_sequence(0.0, 1.0, lambda p, c: -(a * p + b * c) / g, n + 1)
    # v is stored reversed: w[k] = v[n+1-k]
    w_m, w_l = _scaled_sequence(0.0, 1.0, lambda p, c: -(b * c + g * p) / a, n + 2)
    v_m, v_l = w_m[::-1], w_l[::-1]
    with np.errstate(divide="ignore"):
        v_logabs = np.log(np.abs(v_m)) + v_l
    if not np.isfinite(v_logabs[0]) or v_logabs[0] <= math.log(1e-12) + np.max(v_logabs):
        raise SingularMatrix("v_0 vanishes relative to the backward sequence", eigenvalue=0.0)
    i, j = np.indices((n, n)) + 1
    lo, hi = np.minimum(i, j), np.maximum(i, j)
    ratio = g / a
    sign = -np.sign(u_m[lo]) * np.sign(v_m[hi]) * np.sign(v_m[0]) * np.sign(a)
    sign = sign * np.where((j - 1) % 2 == 1, np.sign(ratio), 1.0)
    with np.errstate(divide="ignore"):
        log_mag = (np.log(np.abs(u_m[lo])) + u_l[lo] + np.log(np.abs(v_m[hi])) + v_l[hi]
                   - v_logabs[0] + (j - 1) * math.log(abs(ratio)) - math.log(abs(a)))
    return sign * np.exp(log_mag)


def _invert(t):
    if t.alpha * t.gamma == 0:
        return invert_triangular_case(t)
    return invert_recurrence(t)


def resolvent_tridiag(t):
    """``(Id + M)^{-1}`` for a monotone tridiagonal Toeplitz ``M``."""
    if not is_monotone_tridiag(t):
        raise NotMonotone(f"beta={t.beta} is below the monotonicity threshold {monotone_threshold(t)}")
    return _invert(t.shifted(1.0))


def kronecker(a, b):
    """Block matrix ``[a_ij * b]``."""
    return np.kron(as_matrix(a), as_matrix(b))


def kronecker_resolvent(m, side="right"):
    """Resolvent of ``Id ⊗ M`` (``side="right"``) or ``M ⊗ Id`` (``side="left"``)
    for symmetric monotone ``M``, built from ``J_M`` alone."""
    m = as_matrix(m)
    n = m.shape[0]
    if m.shape != (n, n):
        raise NotSymmetric("matrix must be square")
    if np.max(np.abs(m - m.T), initial=0.0) > 1e-12 * max(1.0, np.max(np.abs(m))):
        raise NotSymmetric("Kronecker resolvent identity needs a symmetric matrix")
    if np.min(np.linalg.eigvalsh(m)) < -1e-10:
        raise NotMonotone("matrix is not positive semidefinite")
    jm = solve_dense(np.eye(n) + m, np.eye(n))
    ident = np.eye(n)
    side = side.lower()
    if side == "right":
        return np.kron(ident, jm)
    if side == "left":
        return np.kron(jm, ident)
    raise ValueError(f"side must be 'left' or 'right', got {side!r}")
