"""Exception hierarchy shared by all modules."""


class ExpMapError(Exception):
    """Base class for every error raised by expmapkit."""


class InvalidInput(ExpMapError, ValueError):
    pass


class RangeExceeded(ExpMapError, OverflowError):
    """exp(Re z) left the floating range; switch to tower arithmetic."""


class SingularValueHit(ExpMapError):
    """The omitted value has no preimage."""


class PullbackHitSingularValue(SingularValueHit):
    pass


class NotConverged(ExpMapError):
    def __init__(self, message, t=None, residual=None):
        super().__init__(message)
        self.t = t
        self.residual = residual


class IncompatibleAddress(ExpMapError, ValueError):
    pass


class NotEscaping(ExpMapError):
    pass


class LocateFailed(ExpMapError):
    pass


class GammaThroughSingularValue(ExpMapError):
    pass


class NonMonotoneCurves(ExpMapError):
    pass


class OutOfTracedRange(ExpMapError):
    pass


class PrefixTooShort(ExpMapError, ValueError):
    pass


class PreconditionViolated(ExpMapError):
    pass


class ConfigError(ExpMapError, ValueError):
    pass
