"""Exception hierarchy shared by all csnet modules.

Every error raised by the library derives from :class:`CsnetError` so callers
(and the command-line front end) can map failure classes to exit codes.
"""


class CsnetError(Exception):
    """Base class for all csnet errors."""

    exit_code = 1


class ConfigurationError(CsnetError, ValueError):
    """A parameter violates its documented precondition (bad sizes, ranges)."""

    exit_code = 2


class InputError(CsnetError, ValueError):
    """Runtime data does not match what an operation requires."""

    exit_code = 3


class SingularMatrixError(CsnetError, ValueError):
    """A least-squares system is rank deficient.

    ``column`` is the index of the offending column (the first column whose
    pivot fell below the rank tolerance).
    """

    exit_code = 4

    def __init__(self, message, column=None):
        super().__init__(message)
        self.column = column


class DegenerateInputError(CsnetError, ValueError):
    """Input carries no usable signal (e.g. an all-zero patch matrix)."""

    exit_code = 5


class IdxFormatError(CsnetError, ValueError):
    """An IDX file failed to parse; ``offset`` is the failing byte offset."""

    exit_code = 6

    def __init__(self, message, offset=None):
        super().__init__(message)
        self.offset = offset


class ModelFormatError(CsnetError, ValueError):
    """A model file is unreadable or has an unsupported version."""

    exit_code = 8
