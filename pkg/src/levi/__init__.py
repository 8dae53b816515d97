"""Formal Levi decompositions, Poisson and Lie algebroid linearization, and
averaging over finite groups.

Submodules
----------
truncpoly
    Exact truncated polynomials and formal coordinate changes.
poisson
    Formal Poisson structures at a singular point.
liecoh
    Lie algebras, representations and Chevalley-Eilenberg cohomology.
normalform
    Order-by-order linearization of Poisson structures and Lie algebroids.
avg
    Averaging almost homomorphisms and almost representations of finite groups.
subavg
    C^1 distance and averaging of almost invariant submanifolds.
"""
from .avg import (AlmostHomomorphism, FiniteGroup, MatrixGroupTarget, average_to_homomorphism,
                  average_to_representation, defect, karcher_mean)
from .errors import LeviError, ObstructedAtOrder
from .liecoh import (Cochain, LieAlgebra, Representation, adjoint_rep, ce_differential,
                     cohomology_dim, killing_form, solve_coboundary, symmetric_power_rep,
                     tensor_rep)
from .normalform import LieAlgebroid, linearize_algebroid, linearize_poisson
from .poisson import PoissonStructure, bracket, pushforward
from .subavg import (AmbientSpace, DiscretizedSubmanifold, average_submanifold, c1_distance,
                     express_as_section)
from .truncpoly import CoordinateChange, TruncatedPolynomial

__all__ = [
    "AlmostHomomorphism",
    "FiniteGroup",
    "MatrixGroupTarget",
    "average_to_homomorphism",
    "average_to_representation",
    "defect",
    "karcher_mean",
    "LeviError",
    "ObstructedAtOrder",
    "Cochain",
    "LieAlgebra",
    "Representation",
    "adjoint_rep",
    "ce_differential",
    "cohomology_dim",
    "killing_form",
    "solve_coboundary",
    "symmetric_power_rep",
    "tensor_rep",
    "LieAlgebroid",
    "linearize_algebroid",
    "linearize_poisson",
    "PoissonStructure",
    "bracket",
    "pushforward",
    "AmbientSpace",
    "DiscretizedSubmanifold",
    "average_submanifold",
    "c1_distance",
    "express_as_section",
    "CoordinateChange",
    "TruncatedPolynomial",
]

__version__ = "0.1.0"
