"""Exception hierarchy shared by the library and the command line.

Every error carries the exit status the CLI reports for it.
"""


class R2DPCAError(Exception):
    """Base class for all library errors."""

    exit_code = 3


class InvalidParameterError(R2DPCAError, ValueError):
    """A parameter is outside its admissible range."""

    exit_code = 1


class InvalidInputError(R2DPCAError, ValueError):
    """Input data is malformed (non-finite entries, bad labels, ...)."""

    exit_code = 2


class DimensionError(InvalidInputError):
    """Array shapes do not line up."""


class LoadError(InvalidInputError):
    """A dataset file could not be read."""

    def __init__(self, message: str, path=None):
        self.path = path
        if path is not None:
            message = f"{message} ({path})"
        super().__init__(message)


class InvalidStateError(R2DPCAError, RuntimeError):
    """An object is not in a usable state, e.g. an empty gallery."""

    exit_code = 2


class SingularityError(R2DPCAError, ArithmeticError):
    """A numerical operation hit a singular point."""

    exit_code = 3
