"""Exception hierarchy shared by all estimators."""


class InfodepError(ValueError):
    """Base class for every error raised by this package."""


class ContractViolationError(InfodepError):
    """An input breaks a documented precondition (e.g. an invalid pmf)."""


class DomainError(InfodepError):
    """A scalar parameter lies outside the domain of the operation."""


class EmptyInputError(InfodepError):
    pass


class DegenerateRangeError(InfodepError):
    """The data span a zero-width range, so no equal-width binning exists."""


class DegenerateSeriesError(InfodepError):
    """A series has zero variance or consists only of ties."""


class OutOfRangeError(InfodepError):
    pass


class LoadError(InfodepError):
    """Raised while parsing a tabular input."""
