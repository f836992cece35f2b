"""Exception types raised across the package."""


class PowerGraphError(Exception):
    """Base class for every error raised by powergraph."""


class SelfLoop(PowerGraphError, ValueError):
    pass


class DuplicateEdge(PowerGraphError, ValueError):
    pass


class VertexOutOfRange(PowerGraphError, IndexError):
    pass


class InvalidWeight(PowerGraphError, ValueError):
    pass


class EmptyGraph(PowerGraphError, ValueError):
    pass


class Disconnected(PowerGraphError, ValueError):
    pass


class InvalidParams(PowerGraphError, ValueError):
    pass


class ParityError(InvalidParams):
    pass


class RetriesExhausted(PowerGraphError, RuntimeError):
    pass


class InvalidR(PowerGraphError, ValueError):
    pass


class TooLarge(PowerGraphError, ValueError):
    """A desk-scale cost guard was exceeded."""


class EverythingDeleted(PowerGraphError, RuntimeError):
    """Cleaning removed every vertex."""


class NotSymmetric(PowerGraphError, ValueError):
    pass


class MaxIterations(PowerGraphError, RuntimeError):
    pass


class NonConvergentComplexPair(PowerGraphError, RuntimeError):
    pass


class EigenFailure(PowerGraphError, RuntimeError):
    pass


class ZeroDegree(PowerGraphError, ValueError):
    pass


class DimensionMismatch(PowerGraphError, ValueError):
    pass


class EmptyCommunity(PowerGraphError, ValueError):
    pass


class KTooLarge(PowerGraphError, ValueError):
    pass


class ZeroNormalizer(PowerGraphError, ArithmeticError):
    pass


class NumericalUnderflow(PowerGraphError, ArithmeticError):
    pass


class NoEdges(PowerGraphError, ValueError):
    pass


class PreconditionViolated(PowerGraphError, ValueError):
    pass


class NotRegular(PowerGraphError, ValueError):
    pass


class GirthTooSmall(PowerGraphError, ValueError):
    pass


class SchemaMismatch(PowerGraphError, ValueError):
    pass
