"""Exception hierarchy for the package."""


class EntropyDualError(Exception):
    """Base class for all errors raised by entropydual."""


class UnknownEntropy(EntropyDualError, KeyError):
    pass


class NonpositiveWeightFunction(EntropyDualError, ValueError):
    pass


class BracketFailure(EntropyDualError, RuntimeError):
    pass


class LengthMismatch(EntropyDualError, ValueError):
    pass


class ShapeMismatch(LengthMismatch):
    pass


class NotAYoungFunction(EntropyDualError, ValueError):
    pass


class DegenerateMomentMap(EntropyDualError, ValueError):
    pass


class DomainViolation(EntropyDualError, ValueError):
    pass


class ZeroDenominator(EntropyDualError, ZeroDivisionError):
    pass


class NotConverged(EntropyDualError, RuntimeError):
    pass


class InfeasibleParameterization(EntropyDualError, ValueError):
    pass
