"""Exception types shared across the package."""


class OscillabError(Exception):
    """Base class for all package errors."""


class ArgumentError(OscillabError, ValueError):
    pass


class RangeError(OscillabError, ValueError):
    """Argument outside the domain covered by a sieved table."""


class PoleError(OscillabError, ValueError):
    """Evaluation at, or too close to, a pole."""


class ConfigurationError(OscillabError, ValueError):
    pass


class EvaluationError(OscillabError, ArithmeticError):
    """A quadrature node produced a non-finite value."""


class ConsistencyError(OscillabError, ArithmeticError):
    pass


class ConvergenceError(OscillabError, ValueError):
    pass


class DomainError(OscillabError, ValueError):
    pass


class DegeneratePredictionError(OscillabError, ArithmeticError):
    def __init__(self, message, value=None):
        super().__init__(message)
        self.value = value


class ExtrapolationError(OscillabError, ArithmeticError):
    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class CacheError(OscillabError, IOError):
    code = 10


class CacheMagicError(CacheError):
    code = 11


class CacheVersionError(CacheError):
    code = 12


class CacheTruncatedError(CacheError):
    code = 13


class CacheMismatchError(CacheError):
    code = 14
