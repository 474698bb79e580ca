"""Exception types raised across the package."""


class InvalidArgumentError(ValueError):
    """An argument is out of range or has the wrong shape."""


class NotHermitianError(InvalidArgumentError):
    pass


class TraceNotOneError(InvalidArgumentError):
    pass


class NotPositiveError(InvalidArgumentError):
    pass


class NotChiFormError(InvalidArgumentError):
    pass


class InvariantError(RuntimeError):
    """An internal consistency check failed (a bug, not bad input)."""
