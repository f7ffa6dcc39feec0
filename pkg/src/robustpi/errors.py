"""Exception hierarchy shared by the numeric modules and the CLI."""


class RobustPIError(Exception):
    """Base class for all package errors."""


class DimensionError(RobustPIError, ValueError):
    pass


class NumericError(RobustPIError, ArithmeticError):
    """An iteration failed to converge or produced non-finite values."""


class StabilityError(RobustPIError):
    """A matrix required to be Hurwitz is not."""


class DefinitenessError(RobustPIError):
    pass


class ParameterError(RobustPIError, ValueError):
    pass


class DomainError(RobustPIError, ValueError):
    """Plant evaluated outside the domain of its dynamics."""


class ConfigError(RobustPIError):
    pass
