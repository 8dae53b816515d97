"""Exception taxonomy.

Every exception carries a short machine-readable ``code`` that the command
line front end copies into its reports.
"""


class LeviError(Exception):
    code = "error"


class DimensionMismatch(LeviError, ValueError):
    code = "dimension_mismatch"


class IndexOutOfRange(LeviError, IndexError):
    code = "index_out_of_range"


class SingularLinearPart(LeviError, ValueError):
    code = "singular_linear_part"


class NotPoisson(LeviError, ValueError):
    code = "not_poisson"


class NotAnAlgebroid(LeviError, ValueError):
    code = "not_an_algebroid"


class InternalCocycleFailure(LeviError, RuntimeError):
    code = "internal_cocycle_failure"


class DegreeTooHigh(LeviError, ValueError):
    code = "degree_too_high"


class AlgebraMismatch(LeviError, ValueError):
    code = "algebra_mismatch"


class NotACocycle(LeviError, ValueError):
    code = "not_a_cocycle"


class Obstructed(LeviError):
    """The right-hand side is a cocycle but not a coboundary.

    ``cocycle`` is the input cochain, ``residual`` the nonzero coordinates of
    its class in the cokernel of the differential, and ``cohomology_dim`` the
    dimension of the cohomology group it lives in.
    """

    code = "obstructed"

    def __init__(self, message, cocycle=None, residual=(), cohomology_dim=None):
        super().__init__(message)
        self.cocycle = cocycle
        self.residual = tuple(residual)
        self.cohomology_dim = cohomology_dim


class ObstructedAtOrder(LeviError):
    code = "obstructed_at_order"

    def __init__(self, order, phase=None, obstruction_dim=0):
        where = f" (phase {phase})" if phase is not None else ""
        super().__init__(f"obstructed at order {order}{where}, "
                         f"obstruction space of dimension {obstruction_dim}")
        self.order = order
        self.phase = phase
        self.obstruction_dim = obstruction_dim


class LogUndefined(LeviError, ValueError):
    code = "log_undefined"


class NoConvergence(LeviError, RuntimeError):
    code = "no_convergence"


class SpreadTooLarge(LeviError, ValueError):
    code = "spread_too_large"


class DefectTooLarge(LeviError, ValueError):
    code = "defect_too_large"


class HypothesisViolated(LeviError, ValueError):
    code = "hypothesis_violated"


class BoundViolated(LeviError, AssertionError):
    """A quantitative conclusion that should hold under the hypotheses failed."""

    code = "bound_violated"


class NotAGroup(LeviError, ValueError):
    code = "not_a_group"


class NotAGraph(LeviError, ValueError):
    code = "not_a_graph"


class UnknownIsometry(LeviError, ValueError):
    code = "unknown_isometry"


class ParseError(LeviError, ValueError):
    code = "parse_error"


class UnknownKind(LeviError, ValueError):
    code = "unknown_kind"
