"""Exception hierarchy.

Everything raised on purpose by the package derives from :class:`SchottkyError`.
Errors that mean "this series cannot be certified to converge" derive from
:class:`ConvergenceError`; the CLI maps those to exit code 3 and the rest to 2.
"""


class SchottkyError(Exception):
    pass


class ConvergenceError(SchottkyError):
    pass


# moebius
class NotLoxodromic(SchottkyError):
    pass


class Degenerate(SchottkyError):
    pass


# groups
class OverlappingCircles(SchottkyError):
    pass


class DegeneratePair(SchottkyError):
    pass


class NotLoxodromicMultiplier(SchottkyError):
    pass


class CoincidentFixedPoints(SchottkyError):
    pass


class MissingPairings(SchottkyError):
    pass


class NotClassical(SchottkyError):
    pass


class PairingMismatch(SchottkyError):
    pass


# measures
class SummabilityMargin(SchottkyError):
    pass


# periods
class ConvergenceGateFailed(ConvergenceError):
    pass


class NoContraction(ConvergenceError):
    pass


class BranchAmbiguity(SchottkyError):
    pass


class BadRadii(SchottkyError, ValueError):
    pass


# hexagon
class BadSides(SchottkyError, ValueError):
    pass


class DomainError(SchottkyError, ValueError):
    pass


class BadLengths(SchottkyError, ValueError):
    pass


# io
class ParseError(SchottkyError):
    pass
