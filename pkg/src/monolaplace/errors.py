"""Exception and warning types shared across the package."""


class MonoLaplaceError(Exception):
    """Base class for all package errors."""


class DomainError(MonoLaplaceError, ValueError):
    """An argument lies outside the documented domain of a function."""


class NonConvergent(MonoLaplaceError):
    """A transform does not converge (or cannot be truncated) at the requested point."""


class DivisionDegenerate(MonoLaplaceError, ZeroDivisionError):
    pass


class ShapeHintViolated(MonoLaplaceError):
    """Sampled f/g does not follow the declared monotone/unimodal shape."""


class SequencePatternViolated(MonoLaplaceError):
    pass


class PatternViolated(MonoLaplaceError):
    pass


class LimitNotDetected(MonoLaplaceError):
    pass


class NoBracket(MonoLaplaceError):
    pass


class ToleranceNotMet(UserWarning):
    """Adaptive quadrature exhausted its panel budget; the best value is returned."""
