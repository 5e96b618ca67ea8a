class SunriseError(Exception):
    """Base class for library errors."""


class DimensionError(SunriseError, ValueError):
    pass


class ContractError(SunriseError, RuntimeError):
    """A documented precondition was violated by the caller."""


class NonFiniteError(SunriseError, FloatingPointError):
    pass
