"""Exception hierarchy shared by the library and the command line."""


class FracBVError(Exception):
    """Base class for all errors raised by :mod:`fracbv`."""


class ConfigError(FracBVError, ValueError):
    """Invalid parameters or configuration (CLI exit code 2)."""


class PreconditionError(FracBVError, ValueError):
    """Input violates the hypothesis of a check, as opposed to failing it."""


class NumericError(FracBVError, ArithmeticError):
    """A computation produced non-finite values (CLI exit code 3)."""
