"""Exception types raised by siphase."""


class SiphaseError(Exception):
    """Base class for all siphase errors."""


class InvalidArgumentError(SiphaseError, ValueError):
    pass


class InvalidSchemeError(SiphaseError, ValueError):
    """A sampling scheme (or the matrix built from it) violates a requirement.

    The message names the specific violation.
    """


class SchemeDegenerateError(SiphaseError, ArithmeticError):
    """An N x N solve inside the reconstruction is numerically singular."""


class EmptySignalError(SiphaseError, ValueError):
    pass
