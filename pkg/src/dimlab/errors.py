"""Exception hierarchy shared by every dimlab module."""


class DimlabError(Exception):
    """Base class for all dimlab errors."""


class InvalidMeasure(DimlabError, ValueError):
    """A measure or component failed its construction invariants."""


class InvalidRatios(DimlabError, ValueError):
    pass


class NoRoot(DimlabError):
    pass


class UnsupportedSet(DimlabError):
    """The test set cannot be evaluated exactly for this measure."""


class UnsupportedMeasure(DimlabError):
    """The operation is not defined on this combination of components."""


class NotProbability(DimlabError, ValueError):
    pass


class ZeroMass(DimlabError, ValueError):
    pass


class ZeroExponent(DimlabError, ValueError):
    pass


class WrongShape(DimlabError, ValueError):
    pass


class TooFewPoints(DimlabError, ValueError):
    pass


class NonPositiveValue(DimlabError, ValueError):
    pass


class EmptyCorrelation(DimlabError):
    pass


class DegenerateBall(DimlabError):
    pass


class InvalidParameters(DimlabError, ValueError):
    pass


class UnknownExample(DimlabError, KeyError):
    pass
