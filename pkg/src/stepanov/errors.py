"""Exception hierarchy shared by every module of the package."""


class StepanovError(Exception):
    """Base class for all errors raised by this package."""


class SchemaError(StepanovError, ValueError):
    """A serialized spec does not match the documented JSON schema."""


class UnknownPrimitive(SchemaError):
    pass


class NonFinite(StepanovError, ArithmeticError):
    """Evaluation produced inf/nan (overflow guard tripped)."""


class GridMismatch(StepanovError, ValueError):
    pass


class WindowTooShort(StepanovError, ValueError):
    pass


class OutOfRange(StepanovError, ValueError):
    pass


class EmptyComparisonWindow(StepanovError, ValueError):
    pass


class ZeroMass(StepanovError, ValueError):
    pass


class DimensionMismatch(StepanovError, ValueError):
    pass


class NegativeTime(StepanovError, ValueError):
    pass


class InvalidExponent(StepanovError, ValueError):
    pass


class NoConvergence(StepanovError, RuntimeError):
    pass


class OffGrid(StepanovError, ValueError):
    pass


class TooManySamples(StepanovError, ValueError):
    pass


class TooManySamplesForExact(TooManySamples):
    pass


class EmptyOverlap(StepanovError, ValueError):
    pass


class UnknownScenario(StepanovError, KeyError):
    pass
