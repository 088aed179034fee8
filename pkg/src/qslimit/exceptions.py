"""Exception hierarchy shared by the numerical kernels, models and CLI."""


class QslError(Exception):
    """Base class for all errors raised by :mod:`qslimit`."""


class PoleError(QslError, ValueError):
    """Gamma function evaluated at (or within 1e-9 of) a non-positive integer."""


class DomainError(QslError, ValueError):
    """Argument outside the mathematical domain of a function."""


class ConvergenceError(QslError, RuntimeError):
    """Adaptive refinement exceeded its depth limit."""


class InvariantViolation(QslError, ValueError):
    """A data-type invariant (positivity, normalisation, bound range) failed."""


class DegenerateDynamicsError(QslError, ArithmeticError):
    """A QSL denominator vanished while the Bures distance did not."""


class SingularityError(QslError, ArithmeticError):
    """A rate expression was evaluated at a zero of its denominator."""


class ConfigError(QslError, ValueError):
    """Invalid command-line flags or configuration file contents."""
