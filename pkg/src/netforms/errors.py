"""Exception hierarchy shared by all modules."""


class NetformsError(Exception):
    """Base class for every error raised by the package."""


class InputError(NetformsError, ValueError):
    """Malformed or inconsistent input (maps to CLI exit code 2)."""


# graph construction and combinatorics
class DanglingEndpoint(InputError):
    pass


class DuplicateId(InputError):
    pass


class EmptyGraph(InputError):
    pass


class LoopPresent(InputError):
    pass


class IsolatedVertex(InputError):
    pass


class UnknownEdge(InputError, KeyError):
    pass


class GraphDisconnected(InputError):
    pass


class FlaggedVertexPresent(InputError):
    pass


# projections and symmetry
class NotAProjection(InputError):
    pass


class DimensionMismatch(InputError):
    pass


class InadmissibleSubspace(InputError):
    pass


# form matrices
class SingularGram(InputError):
    pass


class IndexSetTooLarge(InputError):
    pass


class DiagonalNotCoercive(InputError):
    pass


class NonDiagonalGram(InputError):
    pass


class ShapeMismatch(InputError):
    pass


class EmptySamples(InputError):
    pass


# assembly
class FlaggedVertexInM(InputError):
    pass


class ContinuityViolation(InputError):
    pass


class FlaggedNonzero(InputError):
    pass


# simulation
class SingularStepMatrix(NetformsError):
    pass


class UnstableStep(NetformsError):
    pass


class MeshMismatch(InputError):
    pass


class BudgetExceeded(InputError):
    pass
