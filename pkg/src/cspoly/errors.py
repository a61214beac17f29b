class CspolyError(Exception):
    """Base class for domain errors raised by this package."""


class ResourceCapExceeded(CspolyError):
    """An enumeration or pivot budget was exhausted before an answer was found."""


class PreconditionError(CspolyError, ValueError):
    """An input does not satisfy the condition an operation requires."""
