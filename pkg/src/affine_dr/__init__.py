"""Douglas-Rachford splitting for affine maximally monotone relations.

Submodules
----------
linalg      dense kernels and :class:`AffineSubspace`
affine      affine maps and fixed-point sets
structured  tridiagonal Toeplitz matrices and Kronecker resolvents
monotone    monotonicity tests for (block) matrices
relations   graph algebra, resolvents and the dual solution sets
engine      affine iteration, DR runs, rates and parallel splitting
poisson     the Dirichlet-Poisson demo and the two-half-step scheme
cli         the ``affine-dr`` command
"""

from .affine import AffineMap, douglas_rachford_map, fixed_point_set, projector_map
from .engine import (
    IterationTrace,
    displacement_vector,
    dr_operator,
    estimate_linear_rate,
    friedrichs_cos,
    iterate_closed_form,
    parallel_splitting,
    project_onto_fix,
    run_dr,
    spectral_rate,
)
from .errors import *  # noqa: F401,F403  (exception types)
from .linalg import AffineSubspace, principal_cosines
from .relations import (
    AffineRelation,
    attouch_thera,
    constant_relation,
    fix_decomposition_check,
    from_linear_map,
    inverse,
    normal_cone_affine,
    parallel_sum,
    reflected_resolvent,
    resolvent,
    reversal,
    shadow_limit_predicate,
    sum_relations,
    zero_relation,
    zeros,
)
from .structured import TridiagToeplitz

__version__ = "0.1.0"
