"""Exception hierarchy.

Every failure raised by the library derives from :class:`DynsheafError`, so
callers (the CLI in particular) can collect them as report warnings.
"""


class DynsheafError(Exception):
    """Base class for all library errors."""


# numerics
class NonConvergence(DynsheafError):
    pass


class AmbiguousRank(DynsheafError):
    def __init__(self, message, singular_values=None, cutoff=None):
        super().__init__(message)
        self.singular_values = singular_values
        self.cutoff = cutoff


class OverdeterminedInconsistent(DynsheafError):
    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


# map_core
class DegreeZero(DynsheafError):
    pass


class DegreeCap(DynsheafError):
    pass


class RamificationDegreeMismatch(DynsheafError):
    pass


class NotStabilized(DynsheafError):
    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class SingularMobius(DynsheafError):
    pass


# cycles
class ClusterAmbiguity(DynsheafError):
    pass


class JetOrderInsufficient(DynsheafError):
    pass


class Unclassified(DynsheafError):
    pass


# divisors
class SuperattractingPresent(DynsheafError):
    pass


class FiberDegreeMismatch(DynsheafError):
    pass


class DeltaMismatch(DynsheafError):
    pass


# jets / quad_diff
class PreconditionViolation(DynsheafError):
    pass


class CaseUndetermined(DynsheafError):
    pass


class CriticalBasePoint(DynsheafError):
    pass


class BasisOverflow(DynsheafError):
    pass


class NearCriticalSample(DynsheafError):
    pass


# pairs_ext
class DimensionMismatch(DynsheafError):
    pass


# report_cli
class MapSyntaxError(DynsheafError, SyntaxError):
    """Malformed map expression; ``column`` is the 0-based offset of the offending token."""

    def __init__(self, message, column):
        super().__init__(f"{message} at column {column}")
        self.column = column


class NonRationalExpression(DynsheafError):
    pass
